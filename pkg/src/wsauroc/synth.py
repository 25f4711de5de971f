"""Seeded synthetic multichannel vibration with injected faults.

Each channel is a harmonic series at the shaft rotation frequency plus a
fault component plus white Gaussian noise:

* unbalance raises the rotation fundamental,
* misalignment raises the 2x and 4x rotation harmonics,
* inner/outer race defects add harmonics 1..4 of their characteristic
  frequency with a geometric rolloff.

Fault amplitude is ``fault_gain[type] * severity_quantity``. The frame length
is set so the rotation frequency sits on a DFT bin, and every synthesised
frequency is snapped to the nearest bin, so the spectrum has no leakage.

Randomness comes from numpy's PCG64 generator seeded through
``SeedSequence``. Per-channel phases derive from ``[seed, stream]`` and the
noise of frame ``index`` from ``[seed, NOISE_STREAM, index]``, so frames can
be generated in any order.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .knn import SpectrumFrame
from .scores import PhysicalQuantityMap

BENCH_ROTATION_HZ = 50.17
BENCH_BPFI_HZ = 272.07
BENCH_BPFO_HZ = 179.43

ROTATION_PHASE_STREAM = 1
BEARING_PHASE_STREAM = 2
NOISE_STREAM = 3

U64_MAX = 2**64 - 1


class SynthError(ValueError):
    pass


class FaultType(str, enum.Enum):
    UNBALANCE = "unbalance"
    MISALIGNMENT = "misalignment"
    BPFI = "bpfi"
    BPFO = "bpfo"


DEFAULT_FAULT_GAINS = {
    FaultType.UNBALANCE: 1.0e-3,  # per mg
    FaultType.MISALIGNMENT: 3.0,  # per mm
    FaultType.BPFI: 8.0,  # per mm
    FaultType.BPFO: 8.0,  # per mm
}


@dataclass(frozen=True)
class SynthConfig:
    sample_rate: float = 5120.0
    duration: float = 25 / BENCH_ROTATION_HZ
    channels: int = 4
    rotation_freq: float = BENCH_ROTATION_HZ
    bpfi_freq: float = BENCH_BPFI_HZ
    bpfo_freq: float = BENCH_BPFO_HZ
    noise_sigma: float = 1.5
    baseline_harmonic_amps: tuple[float, ...] = (1.0, 0.5, 0.3, 0.2)
    fault_gain: Mapping[FaultType, float] = field(default_factory=lambda: dict(DEFAULT_FAULT_GAINS))
    bearing_rolloff: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "baseline_harmonic_amps", tuple(float(a) for a in self.baseline_harmonic_amps))
        object.__setattr__(self, "bearing_rolloff", tuple(float(a) for a in self.bearing_rolloff))
        gains = dict(DEFAULT_FAULT_GAINS)
        gains.update({FaultType(k): float(v) for k, v in dict(self.fault_gain).items()})
        object.__setattr__(self, "fault_gain", gains)
        self.validate()

    def validate(self) -> None:
        if not self.duration > 0:
            raise SynthError(f"duration must be positive, got {self.duration!r}")
        if not self.sample_rate > 0:
            raise SynthError(f"sample rate must be positive, got {self.sample_rate!r}")
        if self.channels < 1:
            raise SynthError(f"need at least one channel, got {self.channels}")
        freqs = (self.rotation_freq, self.bpfi_freq, self.bpfo_freq)
        if min(freqs) <= 0:
            raise SynthError("fault frequencies must be positive")
        nyquist_floor = 2 * 4 * max(freqs)
        if not self.sample_rate > nyquist_floor:
            raise SynthError(
                f"sample rate {self.sample_rate:g} Hz must exceed {nyquist_floor:g} Hz "
                "to resolve the fourth harmonic of every fault frequency"
            )
        if self.duration * min(freqs) < 1:
            raise SynthError("duration must cover at least one period of every fault frequency")
        if self.noise_sigma < 0:
            raise SynthError("noise_sigma must be non-negative")
        if not 0 <= int(self.seed) <= U64_MAX:
            raise SynthError("seed must fit in 64 unsigned bits")
        if any(g < 0 for g in self.fault_gain.values()):
            raise SynthError("fault gains must be non-negative")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate * self.duration))

    @property
    def bin_width(self) -> float:
        return self.sample_rate / self.n_samples

    def bin_of(self, frequency: float) -> int:
        return int(round(frequency / self.bin_width))

    def effective(self, frequency: float) -> float:
        """``frequency`` snapped to the nearest DFT bin centre."""
        return self.bin_of(frequency) * self.bin_width

    @property
    def effective_rotation(self) -> float:
        return self.effective(self.rotation_freq)

    @property
    def effective_bpfi(self) -> float:
        return self.effective(self.bpfi_freq)

    @property
    def effective_bpfo(self) -> float:
        return self.effective(self.bpfo_freq)

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "duration": self.duration,
            "channels": self.channels,
            "rotation_freq": self.rotation_freq,
            "bpfi_freq": self.bpfi_freq,
            "bpfo_freq": self.bpfo_freq,
            "noise_sigma": self.noise_sigma,
            "baseline_harmonic_amps": list(self.baseline_harmonic_amps),
            "fault_gain": {t.value: self.fault_gain[t] for t in FaultType},
            "bearing_rolloff": list(self.bearing_rolloff),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> SynthConfig:
        data = dict(data)
        data["baseline_harmonic_amps"] = tuple(data.get("baseline_harmonic_amps", ()))
        data["bearing_rolloff"] = tuple(data.get("bearing_rolloff", ()))
        return cls(**data)


@dataclass(frozen=True)
class FaultSpec:
    fault_type: FaultType
    severity_quantity: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "fault_type", FaultType(self.fault_type))
        if not self.severity_quantity >= 0:
            raise SynthError(f"severity quantity must be >= 0, got {self.severity_quantity!r}")


def _cosine(n_samples: int, bin_index: int, phase: float) -> np.ndarray:
    # reduce k*n modulo N in integers so long frames keep full phase accuracy
    n = np.arange(n_samples, dtype=np.int64)
    cycles = (bin_index * n) % n_samples
    return np.cos(2 * np.pi * cycles / n_samples + phase)


def _phases(config: SynthConfig, stream: int, width: int) -> np.ndarray:
    rng = np.random.default_rng([int(config.seed), stream])
    return rng.uniform(-np.pi, np.pi, size=(config.channels, width))


def rotation_phases(config: SynthConfig) -> np.ndarray:
    width = max(4, len(config.baseline_harmonic_amps))
    return _phases(config, ROTATION_PHASE_STREAM, width)


def bearing_phases(config: SynthConfig, fault_type: FaultType) -> np.ndarray:
    offset = 0 if fault_type == FaultType.BPFI else 1
    phases = _phases(config, BEARING_PHASE_STREAM, 2 * len(config.bearing_rolloff))
    return phases[:, offset::2]


def fault_component(config: SynthConfig, fault: FaultSpec) -> np.ndarray:
    """Noise-free fault signal, shape ``(channels, n_samples)``."""
    n = config.n_samples
    out = np.zeros((config.channels, n))
    amp = config.fault_gain[fault.fault_type] * fault.severity_quantity
    if amp == 0:
        return out
    k_rot = config.bin_of(config.rotation_freq)
    rot_ph = rotation_phases(config)
    for ch in range(config.channels):
        if fault.fault_type == FaultType.UNBALANCE:
            out[ch] += amp * _cosine(n, k_rot, rot_ph[ch, 0])
        elif fault.fault_type == FaultType.MISALIGNMENT:
            out[ch] += amp * _cosine(n, 2 * k_rot, rot_ph[ch, 1])
            out[ch] += amp * _cosine(n, 4 * k_rot, rot_ph[ch, 3])
        else:
            base = config.bpfi_freq if fault.fault_type == FaultType.BPFI else config.bpfo_freq
            k_base = config.bin_of(base)
            ph = bearing_phases(config, fault.fault_type)
            for h, rolloff in enumerate(config.bearing_rolloff, start=1):
                out[ch] += amp * rolloff * _cosine(n, h * k_base, ph[ch, h - 1])
    return out


def baseline_component(config: SynthConfig) -> np.ndarray:
    n = config.n_samples
    k_rot = config.bin_of(config.rotation_freq)
    rot_ph = rotation_phases(config)
    out = np.zeros((config.channels, n))
    for ch in range(config.channels):
        for h, a in enumerate(config.baseline_harmonic_amps, start=1):
            out[ch] += a * _cosine(n, h * k_rot, rot_ph[ch, h - 1])
    return out


def synthesize(config: SynthConfig, fault: FaultSpec, index: int = 0) -> np.ndarray:
    """Generate one frame, shape ``(channels, n_samples)``.

    ``index`` selects the noise realisation; identical arguments give
    bit-identical output.
    """
    frame = baseline_component(config) + fault_component(config, fault)
    if config.noise_sigma > 0:
        rng = np.random.default_rng([int(config.seed), NOISE_STREAM, int(index)])
        frame += config.noise_sigma * rng.standard_normal(frame.shape)
    return frame


def extract_spectrum(frame, sample_rate: float) -> SpectrumFrame:
    """One-sided amplitude/phase spectrum of every channel.

    Amplitudes are scaled so a cosine of amplitude ``A`` on a bin reads ``A``;
    the DC bin (and the Nyquist bin for even lengths) is scaled by ``1/N``.
    """
    x = np.atleast_2d(np.asarray(frame, dtype=float))
    if x.size == 0:
        raise ValueError("empty frame")
    n = x.shape[1]
    if n < 2:
        raise ValueError("need at least two samples per channel")
    spec = np.fft.rfft(x, axis=1)
    mags = np.abs(spec) * (2.0 / n)
    mags[:, 0] /= 2
    if n % 2 == 0:
        mags[:, -1] /= 2
    freqs = np.arange(spec.shape[1]) * (sample_rate / n)
    return SpectrumFrame(freqs, mags, np.angle(spec))


DEFAULT_BAND_EDGES = (0.0, 1000.0)


def band_energy_features(frame: SpectrumFrame, band_edges: Sequence[float] = DEFAULT_BAND_EDGES,
                         max_freq: float = 1000.0) -> np.ndarray:
    """``log(1 + summed magnitude)`` per band, shape ``(channels, bands)``.

    Bands are half-open ``[lo, hi)``. Stands in for a learned spectral
    embedding; it is a fixed, untrained transform.
    """
    edges = np.asarray(band_edges, dtype=float)
    if edges.size < 2:
        raise ValueError("need at least two band edges")
    if not np.all(np.diff(edges) > 0):
        raise ValueError("band edges must be strictly increasing")
    if edges[0] < 0 or edges[-1] > max_freq:
        raise ValueError(f"band edges must lie within [0, {max_freq:g}] Hz")
    freqs = frame.frequencies
    out = np.empty((frame.channels, edges.size - 1))
    for b, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        mask = (freqs >= lo) & (freqs < hi)
        if not mask.any():
            raise ValueError(f"band [{lo:g}, {hi:g}) Hz contains no frequency bins")
        out[:, b] = np.log1p(frame.magnitudes[:, mask].sum(axis=1))
    return out


# -- experiment layout --------------------------------------------------------

BENCH_SEVERITIES = {
    FaultType.UNBALANCE: ((583.0, 1169.0, 1751.0, 2239.0, 3318.0), "mg"),
    FaultType.BPFI: ((0.3, 1.0, 3.0), "mm"),
    FaultType.BPFO: ((0.3, 1.0, 3.0), "mm"),
    FaultType.MISALIGNMENT: ((0.1, 0.3, 0.5), "mm"),
}

FAULT_ORDER = (FaultType.UNBALANCE, FaultType.BPFI, FaultType.BPFO, FaultType.MISALIGNMENT)


@dataclass(frozen=True)
class ExperimentDesign:
    """Sample counts per split. Defaults are the full-size counts divided by 9."""

    train: int = 48
    val: int = 6
    test_normal: int = 6
    per_level: int = 6
    severities: Mapping[FaultType, tuple[tuple[float, ...], str]] = field(
        default_factory=lambda: dict(BENCH_SEVERITIES)
    )

    def __post_init__(self):
        for name in ("train", "val", "test_normal", "per_level"):
            if getattr(self, name) < 1:
                raise SynthError(f"{name} count must be at least 1")

    @classmethod
    def full_scale(cls) -> ExperimentDesign:
        return cls(train=432, val=54, test_normal=54, per_level=54)

    def quantity_map(self, fault_type: FaultType) -> PhysicalQuantityMap:
        levels, unit = self.severities[fault_type]
        q = PhysicalQuantityMap((0.0, *levels), unit)
        q.check_increasing()
        return q


@dataclass(frozen=True)
class FrameRecord:
    index: int
    split: str  # train | val | test
    fault_type: FaultType | None  # None for normal frames
    severity_index: int
    severity_quantity: float


@dataclass
class ExperimentBundle:
    config: SynthConfig
    design: ExperimentDesign
    records: list[FrameRecord]
    frames: list[np.ndarray]

    def quantity_map(self, fault_type: FaultType) -> PhysicalQuantityMap:
        return self.design.quantity_map(fault_type)

    @property
    def fault_types(self) -> list[FaultType]:
        return [t for t in FAULT_ORDER if t in self.design.severities]


def experiment_records(design: ExperimentDesign) -> list[FrameRecord]:
    records = []

    def add(split, fault_type, level, quantity):
        records.append(FrameRecord(len(records), split, fault_type, level, quantity))

    for _ in range(design.train):
        add("train", None, 0, 0.0)
    for _ in range(design.val):
        add("val", None, 0, 0.0)
    # shared normal test frames serve as level 0 for every fault type
    for _ in range(design.test_normal):
        add("test", None, 0, 0.0)
    for fault_type in FAULT_ORDER:
        if fault_type not in design.severities:
            continue
        levels, _unit = design.severities[fault_type]
        for level, quantity in enumerate(levels, start=1):
            for _ in range(design.per_level):
                add("test", fault_type, level, quantity)
    return records


def make_experiment(config: SynthConfig, design: ExperimentDesign | None = None) -> ExperimentBundle:
    design = design or ExperimentDesign()
    records = experiment_records(design)
    frames = []
    for rec in records:
        fault = FaultSpec(rec.fault_type or FaultType.UNBALANCE, rec.severity_quantity)
        frames.append(synthesize(config, fault, rec.index))
    return ExperimentBundle(config, design, records, frames)
