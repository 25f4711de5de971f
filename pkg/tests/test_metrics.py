import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_force_auroc, literal_weights, literal_ws_auroc

from wsauroc.metrics import (
    Index,
    Physics,
    Uniform,
    auroc,
    metric_bias,
    normal_vs_pooled_auroc,
    pairwise_auroc,
    penalty_weights,
    ws_auroc,
)
from wsauroc.scores import PhysicalQuantityMap, QuantityError, SeverityScoreSet

BEARING_W = PhysicalQuantityMap((0.0, 0.3, 1.0, 3.0), "mm")


def sset(groups):
    return SeverityScoreSet.from_groups(groups)


# -- auroc -------------------------------------------------------------------


def test_auroc_examples():
    assert auroc([0.1, 0.2, 0.3], [0.4, 0.5, 0.6]) == 1.0
    assert auroc([5, 5], [5, 5]) == 0.5
    # brute force over all 9 pairs: 1.5 + 2.5 + 3.0 = 7
    assert brute_force_auroc([1, 2, 3], [2, 3, 4]) == 7 / 9
    assert auroc([1, 2, 3], [2, 3, 4]) == 7 / 9


@pytest.mark.parametrize("neg, pos", [([], [1.0]), ([1.0], []), ([math.nan], [1.0]), ([1.0], [math.inf])])
def test_auroc_rejects_bad_input(neg, pos):
    with pytest.raises(ValueError):
        auroc(neg, pos)


small_lists = st.lists(st.integers(0, 5).map(float), min_size=1, max_size=12)


@given(small_lists, small_lists)
def test_auroc_matches_pair_counting(neg, pos):
    assert auroc(neg, pos) == brute_force_auroc(neg, pos)


@given(small_lists, small_lists)
def test_auroc_complement(a, b):
    assert auroc(a, b) + auroc(b, a) == 1.0


@given(small_lists, small_lists)
def test_auroc_is_one_iff_separated(neg, pos):
    assert (auroc(neg, pos) == 1.0) == (min(pos) > max(neg))


# -- pairwise / pooled ---------------------------------------------------------


def test_pairwise_examples():
    assert pairwise_auroc(sset({0: [0], 1: [1]})) == {(0, 1): 1.0}
    assert pairwise_auroc(sset({0: [0], 1: [2], 2: [1]})) == {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 0.0}
    same = pairwise_auroc(sset({0: [0, 1], 1: [0, 1], 2: [0, 1]}))
    assert set(same.values()) == {0.5}


def test_normal_vs_pooled():
    assert normal_vs_pooled_auroc(sset({0: [0], 1: [1], 2: [2]})) == 1.0
    assert normal_vs_pooled_auroc(sset({0: [1], 1: [0], 2: [2]})) == 0.5
    assert normal_vs_pooled_auroc(sset({0: [0, 1], 1: [0, 1]})) == 0.5


# -- penalty weights -----------------------------------------------------------


def test_uniform_n2():
    w = penalty_weights(Uniform(), 2)
    assert w == pytest.approx({(0, 1): 1 / 3, (0, 2): 1 / 3, (1, 2): 1 / 3}, abs=1e-15)


def test_index_n2():
    w = penalty_weights(Index(), 2)
    assert w == {(0, 1): 0.25, (0, 2): 0.5, (1, 2): 0.25}


def test_physics_bearing_weights():
    # pairwise differences 0.3+1.0+3.0+0.7+2.7+2.0 = 9.7
    oracle = literal_weights("physics", 3, BEARING_W.quantities)
    w = penalty_weights(Physics(BEARING_W), 3)
    assert w == pytest.approx(oracle, abs=1e-15)
    assert w[(0, 1)] == pytest.approx(0.3 / 9.7, abs=1e-12)
    assert w[(0, 1)] == pytest.approx(0.0309278, abs=1e-7)
    assert w[(2, 3)] == pytest.approx(0.2061856, abs=1e-7)
    assert w[(0, 3)] == pytest.approx(0.3092784, abs=1e-7)


@pytest.mark.parametrize("scheme", [Uniform(), Index(), Physics(PhysicalQuantityMap((0.0, 5.0)))])
def test_single_pair_weight_is_one(scheme):
    assert penalty_weights(scheme, 1) == {(0, 1): 1.0}


def test_penalty_errors():
    with pytest.raises(ValueError):
        penalty_weights(Uniform(), 0)
    with pytest.raises(QuantityError):
        penalty_weights(Physics(BEARING_W), 2)
    with pytest.raises(QuantityError):
        penalty_weights(Physics(PhysicalQuantityMap((0.0, 1.0, 1.0))), 2)


increasing_quantities = st.integers(1, 12).flatmap(
    lambda n: st.lists(st.floats(1e-3, 1e3), min_size=n + 1, max_size=n + 1)
).map(lambda steps: tuple(itertools.accumulate(steps)))


@given(increasing_quantities)
def test_weights_normalised_and_match_formula(q):
    n = len(q) - 1
    for scheme, name in ((Uniform(), "uniform"), (Index(), "index"), (Physics(PhysicalQuantityMap(q)), "physics")):
        w = penalty_weights(scheme, n)
        assert abs(math.fsum(w.values()) - 1) <= 1e-12
        assert min(w.values()) >= 0
        assert w == pytest.approx(literal_weights(name, n, q), rel=1e-12, abs=1e-15)


# -- ws_auroc ------------------------------------------------------------------


REVERSED = {0: [0.0], 1: [3.0], 2: [2.0], 3: [1.0]}


def test_reversed_anomaly_levels():
    ss = sset(REVERSED)
    assert ws_auroc(ss, Uniform()) == pytest.approx(0.5, abs=1e-12)
    assert ws_auroc(ss, Index()) == pytest.approx(0.6, abs=1e-12)
    assert ws_auroc(ss, Physics(BEARING_W)) == pytest.approx(4.3 / 9.7, abs=1e-12)
    for name, q in (("uniform", None), ("index", None), ("physics", BEARING_W.quantities)):
        oracle = literal_ws_auroc(REVERSED, literal_weights(name, 3, q))
        scheme = {"uniform": Uniform(), "index": Index(), "physics": Physics(BEARING_W)}[name]
        assert ws_auroc(ss, scheme) == pytest.approx(oracle, abs=1e-12)


def test_identical_groups_give_half():
    ss = sset({0: [1, 2], 1: [1, 2], 2: [1, 2]})
    for scheme in (Uniform(), Index(), Physics(PhysicalQuantityMap((0, 1, 2)))):
        assert ws_auroc(ss, scheme) == 0.5


def test_perfect_ordering_exactly_one():
    ss = sset({0: [0.1, 0.2], 1: [0.3], 2: [0.35, 0.4], 3: [9.0]})
    for scheme in (Uniform(), Index(), Physics(PhysicalQuantityMap((0, 0.1, 0.7, 0.9)))):
        assert ws_auroc(ss, scheme) == 1.0


def test_physics_needs_matching_length():
    with pytest.raises(QuantityError):
        ws_auroc(sset({0: [0], 1: [1]}), Physics(BEARING_W))


score_groups = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-3, 3).map(float), min_size=1, max_size=6), min_size=n + 1, max_size=n + 1)
)


@settings(max_examples=200)
@given(score_groups)
def test_ws_auroc_bounded_and_matches_oracle(groups):
    groups = dict(enumerate(groups))
    ss = sset(groups)
    n = ss.max_index
    q = tuple(float(i) ** 1.5 for i in range(n + 1))
    for scheme, name in ((Uniform(), "uniform"), (Index(), "index"), (Physics(PhysicalQuantityMap(q)), "physics")):
        value = ws_auroc(ss, scheme)
        assert 0.0 <= value <= 1.0
        assert value == pytest.approx(literal_ws_auroc(groups, literal_weights(name, n, q)), abs=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=8), st.lists(st.floats(-10, 10), min_size=1, max_size=8))
def test_two_level_reduction(neg, pos):
    ss = sset({0: neg, 1: pos})
    expected = auroc(neg, pos)
    for scheme in (Uniform(), Index(), Physics(PhysicalQuantityMap((0.0, 0.3)))):
        assert ws_auroc(ss, scheme) == expected


@given(score_groups)
def test_monotone_transform_invariance(groups):
    ss = sset(dict(enumerate(groups)))
    moved = ss.map_scores(lambda s: math.exp(s / 2) * 7 - 1)
    assert pairwise_auroc(moved) == pairwise_auroc(ss)
    for scheme in (Uniform(), Index()):
        assert ws_auroc(moved, scheme) == ws_auroc(ss, scheme)


# -- bias ----------------------------------------------------------------------


def test_bias_examples():
    assert metric_bias([1, 1], [0.9, 0.8]) == pytest.approx(-0.15, abs=1e-15)
    assert metric_bias([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert metric_bias([0.5], [1.0]) == 0.5


def test_bias_errors():
    with pytest.raises(ValueError):
        metric_bias([1, 2], [1])
    with pytest.raises(ValueError):
        metric_bias([], [])


def test_concurrent_pairwise_matches_serial():
    from concurrent.futures import ThreadPoolExecutor

    rng = np.random.default_rng(7)
    sets = [sset({i: rng.integers(0, 4, 5).tolist() for i in range(4)}) for _ in range(20)]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(pairwise_auroc, sets))
    assert parallel == [pairwise_auroc(s) for s in sets]
