"""Ensemble anomaly scoring of a synthetic experiment bundle.

Members:

``rotation``, ``bpfi``, ``bpfo``
    nearest-neighbour distance on the concatenated harmonic feature vector
    (4 harmonics x magnitude/phase x channels) of the named base frequency.
``band``
    per-channel nearest-neighbour distance on log band energies, normalised
    per channel and summed. A fixed spectral surrogate, not a trained network.

Each member is normalised with its own validation-distance bounds before the
members are summed.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .knn import channelwise_score, ensemble_sum, harmonic_features, knn_score
from .scores import ScoreSample, SeverityScoreSet, build_score_set
from .synth import DEFAULT_BAND_EDGES, ExperimentBundle, FaultType, band_energy_features, extract_spectrum

MEMBERS = ("rotation", "bpfi", "bpfo", "band")
HARMONICS = 4


class DetectionError(ValueError):
    pass


def parse_members(members: Sequence[str] | str) -> list[str]:
    if isinstance(members, str):
        members = [m for m in members.replace("+", ",").split(",")]
    members = [m.strip().lower() for m in members if m.strip()]
    if not members:
        raise DetectionError("no ensemble members selected")
    unknown = [m for m in members if m not in MEMBERS]
    if unknown:
        raise DetectionError(f"unknown member(s) {', '.join(unknown)}; choose from {', '.join(MEMBERS)}")
    return list(dict.fromkeys(members))


class BundleScorer:
    """Caches spectra of a bundle and scores its test frames per member."""

    def __init__(self, bundle: ExperimentBundle, band_edges=DEFAULT_BAND_EDGES):
        self.bundle = bundle
        self.band_edges = tuple(band_edges)
        cfg = bundle.config
        self.spectra = [extract_spectrum(f, cfg.sample_rate) for f in bundle.frames]
        self.split = {s: [r.index for r in bundle.records if r.split == s] for s in ("train", "val", "test")}
        self._member_cache: dict[str, np.ndarray] = {}

    def _base_frequency(self, member: str) -> float:
        cfg = self.bundle.config
        return {
            "rotation": cfg.effective_rotation,
            "bpfi": cfg.effective_bpfi,
            "bpfo": cfg.effective_bpfo,
        }[member]

    def member_scores(self, member: str) -> np.ndarray:
        """Normalised scores of every test frame, in record order."""
        if member in self._member_cache:
            return self._member_cache[member]
        if member == "band":
            feats = np.stack([band_energy_features(s, self.band_edges) for s in self.spectra])
            by_channel = lambda idx: [feats[idx, ch] for ch in range(feats.shape[1])]  # noqa: E731
            try:
                scores = channelwise_score(
                    by_channel(self.split["train"]), by_channel(self.split["val"]), by_channel(self.split["test"])
                )
            except ValueError as exc:
                raise DetectionError(f"member band: {exc}") from exc
        elif member in MEMBERS:
            base = self._base_frequency(member)
            feats = np.stack([harmonic_features(s, base, HARMONICS) for s in self.spectra])
            try:
                scores = knn_score(feats[self.split["train"]], feats[self.split["val"]], feats[self.split["test"]])
            except ValueError as exc:
                raise DetectionError(f"member {member}: {exc}") from exc
        else:
            raise DetectionError(f"unknown member {member!r}")
        self._member_cache[member] = scores
        return scores

    def ensemble_scores(self, members: Sequence[str]) -> np.ndarray:
        return ensemble_sum([self.member_scores(m) for m in parse_members(members)])

    def score_sets(self, members: Sequence[str]) -> dict[FaultType, SeverityScoreSet]:
        """Per fault type: shared test normals as level 0 plus that fault's levels."""
        scores = self.ensemble_scores(members)
        test_records = [self.bundle.records[i] for i in self.split["test"]]
        out = {}
        for fault_type in self.bundle.fault_types:
            samples = [
                ScoreSample(float(s), r.severity_index)
                for s, r in zip(scores, test_records)
                if r.fault_type is None or r.fault_type == fault_type
            ]
            out[fault_type] = build_score_set(samples)
        return out


def detect(bundle: ExperimentBundle, members: Sequence[str], band_edges=DEFAULT_BAND_EDGES):
    return BundleScorer(bundle, band_edges).score_sets(members)
