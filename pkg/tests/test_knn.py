import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import brute_force_min_distance

from wsauroc.knn import (
    FeatureLayout,
    NormalizationBounds,
    SpectrumFrame,
    channelwise_score,
    ensemble_sum,
    harmonic_features,
    knn_min_distance,
    knn_min_distances,
    nearest_bin,
    normalize_scores,
)
from wsauroc.metrics import auroc

F = 10.0


def comb_frame(channels=1):
    freqs = np.arange(0, 51) * 1.0
    mags = np.zeros((channels, freqs.size))
    for k, m in zip((1, 2, 3, 4), (1, 0.5, 0.25, 0.125)):
        mags[:, int(k * F)] = m
    return SpectrumFrame(freqs, mags, np.zeros_like(mags))


def test_harmonic_lookup_single_channel():
    feats = harmonic_features(comb_frame(), F)
    assert feats.tolist() == [1, 0, 0.5, 0, 0.25, 0, 0.125, 0]


def test_harmonic_lookup_four_channels():
    feats = harmonic_features(comb_frame(4), F)
    assert feats.size == 32 == FeatureLayout(4, 4).length
    assert feats.tolist() == [1, 0, 0.5, 0, 0.25, 0, 0.125, 0] * 4


def test_harmonic_beyond_range():
    with pytest.raises(ValueError, match="harmonic 4"):
        harmonic_features(comb_frame(), 13.0)


def test_layout_is_channel_major_with_phase_interleaved():
    freqs = np.arange(10.0)
    mags = np.array([[0, 1, 2, 3, 4, 5, 6, 7, 8, 9], [0, 10, 20, 30, 40, 50, 60, 70, 80, 90]], float)
    phases = -mags / 100
    feats = harmonic_features(SpectrumFrame(freqs, mags, phases), 2.0, harmonics=2)
    assert feats.tolist() == [2, -0.02, 4, -0.04, 20, -0.2, 40, -0.4]


def test_nearest_bin_ties_go_low():
    freqs = np.array([0.0, 1.0, 2.0])
    assert nearest_bin(freqs, 0.5) == 0
    assert nearest_bin(freqs, 0.5000001) == 1
    assert nearest_bin(freqs, 1.49) == 1
    assert nearest_bin(freqs, 2.0) == 2


def test_spectrum_frame_validation():
    with pytest.raises(ValueError):
        SpectrumFrame(np.array([]), np.zeros((1, 0)), np.zeros((1, 0)))
    with pytest.raises(ValueError):
        SpectrumFrame(np.array([1.0, 0.5]), np.zeros((1, 2)), np.zeros((1, 2)))


def test_knn_examples():
    assert knn_min_distance([[1.0, 2.0], [3.0, 4.0]], [3.0, 4.0]) == 0.0
    # min(3, sqrt(5)) by hand
    assert knn_min_distance([[0, 0], [1, 1]], [0, 3]) == pytest.approx(math.sqrt(5), abs=1e-15)
    assert knn_min_distance([[2]], [5]) == 3.0


def test_knn_errors():
    with pytest.raises(ValueError):
        knn_min_distance([], [1.0])
    with pytest.raises(ValueError, match="dimension"):
        knn_min_distance([[1.0, 2.0]], [1.0])


vectors = st.lists(st.integers(-4, 4).map(float), min_size=3, max_size=3)


@given(st.lists(vectors, min_size=1, max_size=8), vectors)
def test_knn_matches_brute_force(train, query):
    d = knn_min_distance(train, query)
    assert d == pytest.approx(brute_force_min_distance(train, query), abs=1e-12)
    assert (d == 0) == (query in train)


@given(st.lists(vectors, min_size=1, max_size=6), st.lists(vectors, min_size=1, max_size=4), vectors)
def test_knn_monotone_in_training_set(train, extra, query):
    assert knn_min_distance(train + extra, query) <= knn_min_distance(train, query)


def test_batch_order_follows_queries():
    train = np.random.default_rng(0).normal(size=(10, 5))
    queries = np.random.default_rng(1).normal(size=(7, 5))
    batch = knn_min_distances(train, queries)
    assert batch.tolist() == [knn_min_distance(train, q) for q in queries]


def test_normalize_examples():
    b = NormalizationBounds(2, 4)
    assert normalize_scores([3], b).tolist() == [0.5]
    assert normalize_scores([5], b).tolist() == [1.5]
    assert normalize_scores([2, 4], b).tolist() == [0, 1]


@pytest.mark.parametrize("lo, hi", [(2, 2), (3, 1)])
def test_degenerate_bounds(lo, hi):
    with pytest.raises(ValueError, match="degenerate"):
        NormalizationBounds(lo, hi)


distances = st.lists(st.integers(0, 10_000).map(lambda k: k / 100), min_size=1, max_size=12)


@given(distances, distances)
def test_normalisation_keeps_rank_and_auroc(neg, pos):
    b = NormalizationBounds(-1.5, 7.25)
    assert auroc(normalize_scores(neg, b), normalize_scores(pos, b)) == auroc(neg, pos)
    ordered = sorted(neg)
    assert np.all(np.diff(normalize_scores(ordered, b)) >= 0)


def test_ensemble_examples():
    assert ensemble_sum([[1, 2], [3, 4]]).tolist() == [4, 6]
    assert ensemble_sum([[0.25, -1.0]]).tolist() == [0.25, -1.0]
    assert ensemble_sum([[0.5, 0.5]] * 3).tolist() == [1.5, 1.5]
    with pytest.raises(ValueError):
        ensemble_sum([])
    with pytest.raises(ValueError):
        ensemble_sum([[1, 2], [1]])


@given(st.lists(st.lists(st.integers(-100, 100).map(float), min_size=3, max_size=3), min_size=1, max_size=5),
       st.randoms(use_true_random=False))
def test_ensemble_commutative_associative(lists, rnd):
    shuffled = list(lists)
    rnd.shuffle(shuffled)
    assert ensemble_sum(shuffled).tolist() == ensemble_sum(lists).tolist()
    if len(lists) > 2:
        nested = ensemble_sum([ensemble_sum(lists[:2]), *lists[2:]])
        assert nested.tolist() == ensemble_sum(lists).tolist()


def test_channelwise_hand_computation():
    # val distances [1, 3] -> bounds (1, 3); test distance 2 -> 0.5
    score = channelwise_score([[[0.0]]], [[[1.0], [3.0]]], [[[2.0]]])
    assert score.tolist() == [0.5]


def test_channelwise_training_vector_scores_at_most_zero():
    train = [[[0.0, 0.0], [1.0, 1.0]], [[5.0], [6.0]]]
    val = [[[0.5, 0.0], [3.0, 3.0]], [[5.5], [9.0]]]
    test = [[[1.0, 1.0]], [[6.0]]]
    assert channelwise_score(train, val, test)[0] <= 0


def test_channelwise_duplicate_channels_double():
    tr, va, te = [[0.0], [1.0]], [[2.0], [4.0], [0.5]], [[3.0], [-2.0], [7.0]]
    single = channelwise_score([tr], [va], [te])
    double = channelwise_score([tr, tr], [va, va], [te, te])
    assert double.tolist() == (2 * single).tolist()


def test_channelwise_degenerate_channel():
    with pytest.raises(ValueError, match="channel 1"):
        channelwise_score([[[0.0]], [[0.0]]], [[[1.0], [2.0]], [[1.0], [1.0]]], [[[1.0]], [[1.0]]])
