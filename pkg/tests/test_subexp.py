import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aldkit.covers import Cover
from aldkit.depth import FunctionWeight, RateSequence
from aldkit.errors import MonotonicityError, SchemaError, ThresholdNotFound
from aldkit.generators import CoverSpec, generate_cover, path_space
from aldkit.subexp import (
    build_g,
    g_from_json,
    grid,
    halving_rescale,
    load_g,
    thresholds_from_g,
    verify_g_properties,
)

TWO_PIECES = ((2, 4), (2, 1.5))


def test_piecewise_values():
    g = build_g(*TWO_PIECES)
    assert g(0) == 1 and g(2) == 4
    assert g(3) == pytest.approx(4 + 1.5**5 - 1.5**2) and g(3) == pytest.approx(9.34375)
    assert g(math.inf) == math.inf
    with pytest.raises(ValueError):
        g(-1)


def test_bad_parameters():
    with pytest.raises(MonotonicityError):
        build_g((2, 1), (2, 1.5))
    with pytest.raises(MonotonicityError):
        build_g((2, 4), (1.5, 2))
    with pytest.raises(MonotonicityError):
        build_g((2,), (1.0,))
    with pytest.raises(SchemaError):
        build_g((2, 4), (2,))


def test_knots_jump_upward():
    g = build_g(*TWO_PIECES)
    assert g.knot_jumps() == [pytest.approx(1.5**4 - 1.5**2)]
    assert g(2 + 1e-9) - g(2) == pytest.approx(g.knot_jumps()[0], rel=1e-6)


def test_envelopes_and_monotonicity():
    rep = verify_g_properties(build_g(*TWO_PIECES), [1.6, 3])
    assert rep["strictly_increasing"]
    assert all(r["pass"] for r in rep["lower_envelope"] + rep["upper_envelope"])


def test_decay_past_the_last_knot():
    g = build_g(*TWO_PIECES)
    ts = grid(40, start=4)
    ratio = np.array([g(t) / 1.6**t for t in ts])
    assert np.all(np.diff(ratio) < 0)
    row = next(r for r in verify_g_properties(g, [1.6])["decay"] if r["b"] == 1.6)
    assert row["k"] == 2 and row["from_knot"]


def test_decay_from_zero_breaks_at_the_knot():
    # the jump at S_1 = 2 makes g/3^t rise between t = 2 and t = 2.25,
    # so the ratio is only eventually nonincreasing
    rep = verify_g_properties(build_g(*TWO_PIECES), [3])
    row = next(r for r in rep["decay"] if r["k"] == 1)
    assert not row["from_knot"]
    assert row["tail_start"] == 2.25 and row["eventually_nonincreasing"]
    g = build_g(*TWO_PIECES)
    assert g(2.25) / 3**2.25 > g(2) / 3**2


def test_single_piece_base_equal_to_rate_is_skipped():
    assert verify_g_properties(build_g((5,), (2,)), [2])["decay"] == []


def test_thresholds():
    assert thresholds_from_g(lambda t: t + 1, 1, 40).T == {1: 1.0}
    assert thresholds_from_g(lambda t: 1.0, 3, 40).T == {1: 0.0, 2: 0.0, 3: 0.0}
    with pytest.raises(ThresholdNotFound):
        thresholds_from_g(lambda t: 2.0**t, 2, 40)


@given(st.floats(0.05, 1.0), st.integers(1, 6))
def test_thresholds_satisfy_their_inequality(a, k_max):
    g = lambda t: (1 + t) ** (1 + a)  # noqa: E731
    table = thresholds_from_g(g, k_max, 400)
    prev = 0.0
    for k in range(1, k_max + 1):
        assert table[k] >= prev
        prev = table[k]
        for t in grid(400):
            if t >= table[k]:
                assert math.log(g(t)) <= t * math.log1p(1 / k) + 1e-12


def test_halving_rescale_on_long_path():
    p = path_space(200)
    g = FunctionWeight(lambda t: t + 1, "t+1")
    table = thresholds_from_g(g, 4, 400)
    seq = RateSequence(
        {k: (generate_cover(p, CoverSpec("intervals", length=24 * k, overlap=12 * k)), g) for k in (1, 2, 3, 4)}
    )
    rep = halving_rescale(p, seq, table)
    assert [r["survives"] for r in rep["rows"]] == [True, True, False, False]
    assert rep["certified"] == {1: 2.0, 2: 5.0} and rep["all_pass"]
    assert sorted(rep["sequence"].entries) == [1, 2]


def test_halving_rescale_deep_cover_has_empty_tail():
    p = path_space(10)
    g = FunctionWeight(lambda t: t + 1, "t+1")
    full = Cover(p, [range(10)])
    rep = halving_rescale(p, RateSequence({1: (full, g)}), thresholds_from_g(g, 1, 40))
    assert rep["rows"][0]["survives"] and rep["rows"][0]["chain_pass"]


def test_g_json_round_trip(tmp_path):
    g = build_g(*TWO_PIECES)
    assert g_from_json(g.to_json()) == g
    path = tmp_path / "g.json"
    path.write_text('{"kind": "table", "t": [0, 2], "g": [1, 5]}')
    assert load_g(path)(1) == 3
    with pytest.raises(SchemaError):
        load_g(tmp_path / "missing.json")
    with pytest.raises(SchemaError):
        g_from_json({"kind": "spline"})


@given(
    st.lists(st.integers(1, 5), min_size=1, max_size=4),
    st.lists(st.floats(1.05, 2.5), min_size=4, max_size=4),
)
def test_envelope_properties_hold_for_random_parameters(steps, rates):
    S = np.cumsum(steps).tolist()
    c = sorted(rates, reverse=True)[: len(S)]
    g = build_g(S, c)
    rep = verify_g_properties(g, [])
    assert rep["strictly_increasing"]
    assert all(r["pass"] for r in rep["lower_envelope"])
    assert all(j > 0 for j in g.knot_jumps())
    # within its own piece g meets the upper envelope with equality
    for k in range(1, len(S)):
        for t in grid(S[k], start=S[k - 1])[1:]:
            env = g.knot_values[k - 1] + c[k] ** (S[k - 1] + t) - c[k] ** S[k - 1]
            assert g(t) == pytest.approx(env, rel=1e-12)
    # the last piece governs every t past its knot
    assert not rep["upper_envelope"] or rep["upper_envelope"][-1]["pass"]


def test_upper_envelope_fails_past_the_next_knot():
    # with three pieces the jump at S_2 lifts g above the second-piece envelope
    g = build_g((1, 2, 3), (2, 2, 2))
    rep = verify_g_properties(g, [])
    assert [r["pass"] for r in rep["upper_envelope"]] == [False, True]
    env = g.knot_values[0] + 2 ** (1 + 2.5) - 2**1
    assert g(2.5) > env
