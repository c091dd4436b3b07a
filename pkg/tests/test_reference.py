"""Hand-computed checks of the naive oracles themselves."""

import math

import pytest

from aldkit import reference as ref

P4 = [[abs(i - j) for j in range(4)] for i in range(4)]
P10 = [[abs(i - j) for j in range(10)] for i in range(10)]
TWO_WINDOWS = [list(range(6)), list(range(4, 10))]


def test_boundary_distance_by_hand():
    assert ref.boundary_distance(P10, TWO_WINDOWS[0], 0) == 6
    assert ref.boundary_distance(P10, TWO_WINDOWS[1], 4) == 1
    assert ref.boundary_distance(P10, TWO_WINDOWS[0], 7) == 0
    assert ref.boundary_distance(P10, list(range(10)), 3) == math.inf


def test_depth_mean_by_hand():
    w = lambda t: 1.1**t  # noqa: E731
    assert ref.depth_mean(P10, TWO_WINDOWS, w, 4) == pytest.approx((1.1**2 + 1.1) / 2)
    assert ref.depth_mean(P10, TWO_WINDOWS, w, 0) == pytest.approx(1.1**6)


def test_witness_vectors_by_hand():
    vecs = ref.witness_vectors(P10, TWO_WINDOWS, 1.0, (0, 4))
    assert vecs[4][0] == pytest.approx(math.e**2 - 1) and vecs[4][4] == pytest.approx(math.e - 1)
    assert vecs[9][0] == 0


def test_variation_ratio_on_a_partition_is_zero_within_blocks():
    halves = [list(range(5)), list(range(5, 10))]
    assert ref.variation_ratio(P10, halves, 1.0, (0, 5), 0.5) == 0.0


def test_lebesgue_by_hand():
    assert ref.lebesgue_number(P10, TWO_WINDOWS) == 2
    assert ref.lebesgue_number(P4, [[0], [1], [2], [3]]) == 0
    assert ref.lebesgue_number(P4, [[0, 1, 2, 3]]) == 3


def test_small_subsets():
    assert len(ref.small_subsets(P4, 0)) == 4
    assert len(ref.small_subsets(P4, 1)) == 4 + 3


def test_multiplicity_oracles_agree_by_hand():
    for solver in (ref.min_multiplicity_bruteforce, ref.min_multiplicity_milp):
        assert solver(P4, 1, 2) == 2
        assert solver(P4, 0, 0) == 1
        assert solver(P4, 3, 3) == 1
