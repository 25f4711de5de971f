"""Nearest-neighbour anomaly scoring on harmonic spectral features.

Feature vectors are laid out channel-major, harmonic-minor, with
``(magnitude, phase)`` innermost. Phases are used raw in (-pi, pi]; the 2*pi
wrap is not unwrapped.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectrumFrame:
    """One-sided spectrum of a multichannel frame on a shared frequency grid.

    ``magnitudes`` and ``phases`` have shape ``(channels, bins)``.
    """

    frequencies: np.ndarray
    magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        mags = np.atleast_2d(np.asarray(self.magnitudes, dtype=float))
        phases = np.atleast_2d(np.asarray(self.phases, dtype=float))
        if freqs.ndim != 1 or freqs.size == 0:
            raise ValueError("spectrum has no frequency bins")
        if mags.shape != phases.shape or mags.shape[1] != freqs.size:
            raise ValueError(
                f"magnitude {mags.shape} / phase {phases.shape} arrays do not match {freqs.size} bins"
            )
        if mags.shape[0] == 0:
            raise ValueError("spectrum has no channels")
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "phases", phases)

    @property
    def channels(self) -> int:
        return self.magnitudes.shape[0]


@dataclass(frozen=True)
class FeatureLayout:
    channels: int
    harmonics: int
    interleave: str = "mag,phase"

    @property
    def length(self) -> int:
        return self.channels * self.harmonics * 2

    def header(self) -> str:
        return f"# layout: channels={self.channels} harmonics={self.harmonics} interleave={self.interleave}"


@dataclass(frozen=True)
class NormalizationBounds:
    min: float
    max: float

    def __post_init__(self):
        if not (np.isfinite(self.min) and np.isfinite(self.max)):
            raise ValueError(f"normalization bounds must be finite, got ({self.min}, {self.max})")
        if not self.max > self.min:
            raise ValueError(f"degenerate normalization bounds: max {self.max!r} <= min {self.min!r}")

    @classmethod
    def from_distances(cls, distances) -> NormalizationBounds:
        d = np.asarray(distances, dtype=float)
        if d.size == 0:
            raise ValueError("no validation distances")
        return cls(float(d.min()), float(d.max()))


def nearest_bin(frequencies: np.ndarray, target: float) -> int:
    """Index of the bin nearest ``target``; an exact midpoint goes to the lower bin."""
    hi = int(np.searchsorted(frequencies, target, side="left"))
    if hi == 0:
        return 0
    if hi == frequencies.size:
        return hi - 1
    lo = hi - 1
    return lo if target - frequencies[lo] <= frequencies[hi] - target else hi


def harmonic_features(frame: SpectrumFrame, base_frequency: float, harmonics: int = 4) -> np.ndarray:
    """Magnitude and phase at the first ``harmonics`` multiples of ``base_frequency``.

    Returns a vector of length ``channels * harmonics * 2``.

    Raises
    ------
    ValueError
        If a harmonic falls outside the frame's frequency range.
    """
    if not base_frequency > 0:
        raise ValueError(f"base frequency must be positive, got {base_frequency!r}")
    if harmonics < 1:
        raise ValueError(f"need at least one harmonic, got {harmonics}")
    freqs = frame.frequencies
    bins = []
    for k in range(1, harmonics + 1):
        target = k * base_frequency
        if target < freqs[0] or target > freqs[-1]:
            raise ValueError(
                f"harmonic {k} at {target:.6g} Hz is outside the spectrum range "
                f"[{freqs[0]:.6g}, {freqs[-1]:.6g}] Hz"
            )
        bins.append(nearest_bin(freqs, target))
    out = np.empty((frame.channels, harmonics, 2))
    out[:, :, 0] = frame.magnitudes[:, bins]
    out[:, :, 1] = frame.phases[:, bins]
    return out.ravel()


def _stack(vectors, what: str) -> np.ndarray:
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[0] == 0:
        raise ValueError(f"{what} is empty")
    return arr


def knn_min_distance(train: Sequence[Sequence[float]], query: Sequence[float]) -> float:
    """Euclidean distance from ``query`` to its nearest training vector (k=1)."""
    return float(knn_min_distances(train, [query])[0])


def knn_min_distances(train, queries) -> np.ndarray:
    """Vectorised :func:`knn_min_distance` over a batch; output order follows ``queries``."""
    train = _stack(train, "training set")
    queries = _stack(queries, "query set")
    if train.shape[1] != queries.shape[1]:
        raise ValueError(f"dimension mismatch: training vectors have {train.shape[1]}, queries {queries.shape[1]}")
    out = np.empty(queries.shape[0])
    for idx, q in enumerate(queries):
        diff = train - q
        out[idx] = np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff)))
    return out


def normalize_scores(distances, bounds: NormalizationBounds) -> np.ndarray:
    """Affine rescale ``(d - min) / (max - min)``, without clamping."""
    d = np.asarray(distances, dtype=float)
    if not np.all(np.isfinite(d)):
        raise ValueError("non-finite distance")
    return (d - bounds.min) / (bounds.max - bounds.min)


def ensemble_sum(score_lists) -> np.ndarray:
    """Elementwise sum of equal-length member score lists."""
    if len(score_lists) == 0:
        raise ValueError("no score lists to combine")
    lengths = {len(s) for s in score_lists}
    if len(lengths) != 1:
        raise ValueError(f"score lists differ in length: {sorted(lengths)}")
    total = np.zeros(lengths.pop())
    for scores in score_lists:
        total = total + np.asarray(scores, dtype=float)
    return total


def knn_score(train, val, test) -> np.ndarray:
    """Score ``test`` by nearest-neighbour distance normalised on ``val``."""
    bounds = NormalizationBounds.from_distances(knn_min_distances(train, val))
    return normalize_scores(knn_min_distances(train, test), bounds)


def channelwise_score(train, val, test) -> np.ndarray:
    """Score each channel separately, normalise per channel, then sum over channels.

    Each argument is indexed ``[channel][event]`` and holds one feature vector
    per event.
    """
    if not (len(train) == len(val) == len(test)):
        raise ValueError(f"channel counts differ: train {len(train)}, val {len(val)}, test {len(test)}")
    if len(train) == 0:
        raise ValueError("no channels")
    per_channel = []
    for ch, (tr, va, te) in enumerate(zip(train, val, test)):
        try:
            per_channel.append(knn_score(tr, va, te))
        except ValueError as exc:
            raise ValueError(f"channel {ch}: {exc}") from exc
    return ensemble_sum(per_channel)
