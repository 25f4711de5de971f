"""AUROC, pairwise AUROC across severity levels, penalty weights and WS-AUROC.

WS-AUROC is ``sum_{i<j} p_ij * a_ij`` where ``a_ij`` is the AUROC with level
``i`` as the negative class and level ``j`` as the positive class, and the
penalties ``p_ij`` sum to one.

The weighted sum is accumulated in exact rational arithmetic and rounded
once. This makes two properties hold bit-for-bit rather than to a tolerance:
a two-level set gives exactly its AUROC, and a perfectly ordered set gives
exactly 1.0.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .scores import (
    PhysicalQuantityMap,
    ScoreDataError,
    SeverityScoreSet,
    validate_quantity_count,
)

SCHEME_NAMES = ("uniform", "index", "physics")


@dataclass(frozen=True)
class Uniform:
    name = "uniform"


@dataclass(frozen=True)
class Index:
    name = "index"


@dataclass(frozen=True)
class Physics:
    quantities: PhysicalQuantityMap
    name = "physics"


PenaltyScheme = Union[Uniform, Index, Physics]


def _as_array(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"{what} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite values")
    return arr


def auroc_counts(negatives, positives) -> tuple[int, int, int]:
    """Return ``(wins, ties, pairs)`` over all (negative, positive) pairs.

    A win is a pair whose positive scores strictly above its negative.
    """
    neg = np.sort(_as_array(negatives, "negatives"))
    pos = _as_array(positives, "positives")
    below = np.searchsorted(neg, pos, side="left")
    not_above = np.searchsorted(neg, pos, side="right")
    wins = int(below.sum())
    ties = int((not_above - below).sum())
    return wins, ties, neg.size * pos.size


def auroc(negatives: Sequence[float], positives: Sequence[float]) -> float:
    """Mann-Whitney AUROC with half credit for tied pairs.

    Equal to the probability that a random positive outscores a random
    negative. Runs in O(m log m).

    >>> auroc([1, 2, 3], [2, 3, 4])
    0.7777777777777778
    """
    wins, ties, pairs = auroc_counts(negatives, positives)
    return (wins + 0.5 * ties) / pairs


def _auroc_exact(negatives, positives) -> Fraction:
    wins, ties, pairs = auroc_counts(negatives, positives)
    return Fraction(2 * wins + ties, 2 * pairs)


def pairwise_auroc(score_set: SeverityScoreSet) -> dict[tuple[int, int], float]:
    """AUROC ``a_ij`` for every pair ``i < j`` (lower level is the negative class)."""
    n = score_set.max_index
    return {
        (i, j): auroc(score_set.groups[i], score_set.groups[j])
        for i in range(n)
        for j in range(i + 1, n + 1)
    }


def _exact_weights(scheme: PenaltyScheme, n: int) -> dict[tuple[int, int], Fraction]:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"need at least one anomaly level, got n={n!r}")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n + 1)]
    if isinstance(scheme, Uniform):
        return {p: Fraction(2, n * (n + 1)) for p in pairs}
    if isinstance(scheme, Index):
        return {(i, j): Fraction(6 * (j - i), n * (n + 1) * (n + 2)) for i, j in pairs}
    if isinstance(scheme, Physics):
        validate_quantity_count(n, scheme.quantities)
        w = [Fraction(q) for q in scheme.quantities.quantities]
        # normaliser runs over every pair a < b
        total = sum(w[j] - w[i] for i, j in pairs)
        return {(i, j): (w[j] - w[i]) / total for i, j in pairs}
    raise TypeError(f"unknown penalty scheme {scheme!r}")


def penalty_weights(scheme: PenaltyScheme, n: int) -> dict[tuple[int, int], float]:
    """Penalty ``p_ij`` for every level pair ``0 <= i < j <= n``.

    Uniform gives ``2/(n(n+1))`` to every pair, Index gives
    ``6(j-i)/(n(n+1)(n+2))``, and Physics gives ``(w_j - w_i)`` divided by
    the sum of ``w_b - w_a`` over all pairs ``a < b``.

    Raises
    ------
    ValueError
        If ``n < 1``.
    QuantityError
        If a Physics quantity list has the wrong length or is not strictly
        increasing.
    """
    return {pair: float(p) for pair, p in _exact_weights(scheme, n).items()}


def ws_auroc(score_set: SeverityScoreSet, scheme: PenaltyScheme) -> float:
    """Penalty-weighted sum of the pairwise AUROCs of a severity score set."""
    n = score_set.max_index
    weights = _exact_weights(scheme, n)
    total = Fraction(0)
    for (i, j), p in weights.items():
        total += p * _auroc_exact(score_set.groups[i], score_set.groups[j])
    return float(total)


def normal_vs_pooled_auroc(score_set: SeverityScoreSet) -> float:
    """AUROC of level 0 against all anomaly levels pooled together."""
    pooled = [s for i in range(1, score_set.max_index + 1) for s in score_set.groups[i]]
    return auroc(score_set.groups[0], pooled)


def metric_bias(x_values: Sequence[float], y_values: Sequence[float]) -> float:
    """Mean of ``y - x``. Negative means the y metric reads lower, i.e. is stricter."""
    if len(x_values) != len(y_values):
        raise ValueError(f"length mismatch: {len(x_values)} x values, {len(y_values)} y values")
    if len(x_values) == 0:
        raise ValueError("no values to compare")
    diffs = [float(y) - float(x) for x, y in zip(x_values, y_values)]
    if not all(math.isfinite(d) for d in diffs):
        raise ValueError("non-finite metric value")
    return math.fsum(diffs) / len(diffs)


def scheme_from_name(name: str, quantities: PhysicalQuantityMap | None = None) -> PenaltyScheme:
    name = name.lower()
    if name == "uniform":
        return Uniform()
    if name == "index":
        return Index()
    if name == "physics":
        if quantities is None:
            raise ScoreDataError("physics penalty needs physical quantities")
        return Physics(quantities)
    raise ValueError(f"unknown scheme {name!r}; choose from {', '.join(SCHEME_NAMES)}")
