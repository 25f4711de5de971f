"""Severity-labelled anomaly scores and the physical quantities behind each level.

Scores are grouped by severity index ``0..n`` where ``0`` is the normal
condition. Indices must be contiguous; a gap is reported rather than
re-indexed, because re-indexing silently changes the index penalty.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .io import atomic_write_text


class ScoreDataError(ValueError):
    """Base class for malformed score or quantity data."""


class MissingNormalLevelError(ScoreDataError):
    pass


class NonContiguousLevelsError(ScoreDataError):
    def __init__(self, missing: int, max_index: int):
        self.missing = missing
        self.max_index = max_index
        super().__init__(f"severity level {missing} has no samples (levels must cover 0..{max_index})")


class NonFiniteScoreError(ScoreDataError):
    def __init__(self, position: int, score: float):
        self.position = position
        self.score = score
        super().__init__(f"record {position}: score {score!r} is not finite")


class QuantityError(ScoreDataError):
    pass


class CsvFormatError(ScoreDataError):
    def __init__(self, path, row: int, message: str):
        self.path = str(path)
        self.row = row
        super().__init__(f"{path}: row {row}: {message}")


@dataclass(frozen=True)
class ScoreSample:
    score: float
    severity: int

    def __post_init__(self):
        if isinstance(self.severity, bool) or int(self.severity) != self.severity or self.severity < 0:
            raise ScoreDataError(f"severity must be a non-negative integer, got {self.severity!r}")


@dataclass(frozen=True)
class SeverityScoreSet:
    """Scores grouped by contiguous severity index ``0..max_index``.

    Build instances with :func:`build_score_set` or :meth:`from_groups`; both
    run the structural checks.
    """

    groups: Mapping[int, tuple[float, ...]]
    max_index: int

    @classmethod
    def from_groups(cls, groups: Mapping[int, Iterable[float]]) -> SeverityScoreSet:
        samples = [ScoreSample(float(s), int(level)) for level, scores in groups.items() for s in scores]
        return build_score_set(samples)

    @property
    def levels(self) -> range:
        return range(self.max_index + 1)

    def group(self, level: int) -> tuple[float, ...]:
        return self.groups[level]

    def sizes(self) -> list[int]:
        return [len(self.groups[i]) for i in self.levels]

    def all_scores(self) -> list[float]:
        return [s for i in self.levels for s in self.groups[i]]

    def map_scores(self, fn) -> SeverityScoreSet:
        """Return a new set with ``fn`` applied to every score."""
        return SeverityScoreSet.from_groups({i: [fn(s) for s in self.groups[i]] for i in self.levels})


@dataclass(frozen=True)
class PhysicalQuantityMap:
    """Physical cause magnitude ``w_i`` for each severity index (``w_0`` is normal)."""

    quantities: tuple[float, ...]
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "quantities", tuple(float(q) for q in self.quantities))
        for i, q in enumerate(self.quantities):
            if not math.isfinite(q):
                raise QuantityError(f"quantity for level {i} is not finite: {q!r}")

    def __len__(self):
        return len(self.quantities)

    def check_increasing(self) -> None:
        for i in range(len(self.quantities) - 1):
            if not self.quantities[i] < self.quantities[i + 1]:
                raise QuantityError(
                    f"quantities must be strictly increasing; levels ({i},{i + 1}) have "
                    f"{self.quantities[i]!r} >= {self.quantities[i + 1]!r}"
                )


def build_score_set(samples: Sequence[ScoreSample]) -> SeverityScoreSet:
    """Group samples by severity and check the level structure.

    Raises
    ------
    ScoreDataError
        If ``samples`` is empty.
    NonFiniteScoreError
        For the first NaN or infinite score (``position`` is its index).
    MissingNormalLevelError
        If no sample has severity 0.
    NonContiguousLevelsError
        If some level between 0 and the maximum has no samples, or only
        level 0 is present.
    """
    if not samples:
        raise ScoreDataError("no samples given")
    grouped: dict[int, list[float]] = {}
    for pos, sample in enumerate(samples):
        score = float(sample.score)
        if not math.isfinite(score):
            raise NonFiniteScoreError(pos, score)
        grouped.setdefault(int(sample.severity), []).append(score)

    if 0 not in grouped:
        raise MissingNormalLevelError("severity level 0 (normal condition) has no samples")
    max_index = max(grouped)
    if max_index < 1:
        raise NonContiguousLevelsError(1, 1)
    for level in range(max_index + 1):
        if level not in grouped:
            raise NonContiguousLevelsError(level, max_index)
    return SeverityScoreSet(
        groups={level: tuple(grouped[level]) for level in range(max_index + 1)},
        max_index=max_index,
    )


def validate_quantities(score_set: SeverityScoreSet, quantities: PhysicalQuantityMap) -> None:
    """Check that ``quantities`` has one strictly increasing entry per level."""
    validate_quantity_count(score_set.max_index, quantities)


def validate_quantity_count(n: int, quantities: PhysicalQuantityMap) -> None:
    if len(quantities) != n + 1:
        raise QuantityError(f"expected {n + 1} quantities for levels 0..{n}, got {len(quantities)}")
    quantities.check_increasing()


# -- CSV ---------------------------------------------------------------------


def _rows(path: Path, required: tuple[str, ...]):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        if reader.fieldnames is None:
            raise CsvFormatError(path, 1, "missing header")
        header = [h.strip() for h in reader.fieldnames]
        missing = [c for c in required if c not in header]
        if missing:
            raise CsvFormatError(path, 1, f"header lacks column(s) {', '.join(missing)}")
        reader.fieldnames = header
        # row 1 is the header
        for row_number, row in enumerate(reader, start=2):
            yield row_number, row


def _parse_float(path, row_number, text, column) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise CsvFormatError(path, row_number, f"{column} {text!r} is not a number") from None
    if not math.isfinite(value):
        raise CsvFormatError(path, row_number, f"{column} {text!r} is not finite")
    return value


def _parse_level(path, row_number, text) -> int:
    try:
        level = int(str(text).strip())
    except (TypeError, ValueError):
        raise CsvFormatError(path, row_number, f"severity {text!r} is not an integer") from None
    if level < 0:
        raise CsvFormatError(path, row_number, f"severity {level} is negative")
    return level


def read_scores_csv(path) -> SeverityScoreSet:
    """Read a ``score,severity`` CSV file into a score set."""
    path = Path(path)
    samples = []
    for row_number, row in _rows(path, ("score", "severity")):
        score = _parse_float(path, row_number, row["score"], "score")
        samples.append(ScoreSample(score, _parse_level(path, row_number, row["severity"])))
    if not samples:
        raise CsvFormatError(path, 2, "no data rows")
    return build_score_set(samples)


def read_quantities_csv(path, unit: str = "") -> PhysicalQuantityMap:
    """Read a ``severity,quantity`` CSV, one row per level.

    A missing level-0 row defaults ``w_0`` to 0.
    """
    path = Path(path)
    by_level: dict[int, float] = {}
    for row_number, row in _rows(path, ("severity", "quantity")):
        level = _parse_level(path, row_number, row["severity"])
        if level in by_level:
            raise CsvFormatError(path, row_number, f"duplicate severity {level}")
        by_level[level] = _parse_float(path, row_number, row["quantity"], "quantity")
    if not by_level:
        raise CsvFormatError(path, 2, "no data rows")
    by_level.setdefault(0, 0.0)
    top = max(by_level)
    gaps = [i for i in range(top + 1) if i not in by_level]
    if gaps:
        raise QuantityError(f"{path}: no quantity for severity level {gaps[0]}")
    return PhysicalQuantityMap(tuple(by_level[i] for i in range(top + 1)), unit)


def write_scores_csv(path, scores: Iterable[tuple[float, int]]) -> None:
    lines = ["score,severity"]
    lines += [f"{float(s)!r},{int(level)}" for s, level in scores]
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_quantities_csv(path, quantities: PhysicalQuantityMap) -> None:
    lines = ["severity,quantity"]
    lines += [f"{i},{q!r}" for i, q in enumerate(quantities.quantities)]
    atomic_write_text(path, "\n".join(lines) + "\n")
