import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aldkit import reference as ref
from aldkit.covers import Cover
from aldkit.depth import (
    Exponential,
    FunctionWeight,
    Geometric,
    RateSequence,
    Tabulated,
    amplification_bound,
    amplification_check,
    ald_profile_rows,
    ald_score,
    check_ald_condition,
    depth_mean,
    log_depth_mean,
    parse_weight,
    rate_convert,
    score,
)
from aldkit.errors import HypothesisFailed, MonotonicityError
from aldkit.generators import CoverSpec, generate_cover, path_space
from aldkit.space import INFINITE

from conftest import spaces_with_covers


def test_weights_at_zero_and_infinity():
    for w in (Exponential(3.0), Geometric(1.5)):
        assert w(0) == 1 and w(INFINITE) == INFINITE
    assert Exponential(2.0)(4) == pytest.approx(math.e**2)
    assert Geometric(2.0)(10) == 1024


def test_weight_validation():
    with pytest.raises(ValueError):
        Exponential(0)
    with pytest.raises(ValueError):
        Geometric(1.0)
    with pytest.raises(MonotonicityError):
        Tabulated((0, 1, 2), (1, 3, 2))


def test_tabulated_interpolates_and_holds():
    w = Tabulated((0, 2, 4), (1, 5, 9))
    assert w(1) == 3 and w(4) == 9 and w(100) == 9 and w(INFINITE) == INFINITE
    assert Tabulated((0, 2), (1, 5), g_max=50)(7) == 50


def test_overflow_goes_to_infinity_with_exact_log():
    w = Exponential(1.0)
    assert w(1000) == INFINITE and w.log(1000) == 1000
    assert Geometric(2.0).log(2000) == pytest.approx(2000 * math.log(2))


def test_parse_weight():
    assert parse_weight("exponential:5").f == 5
    assert parse_weight("geometric:1.1").c == 1.1
    assert parse_weight("linear:2")(3) == 6
    for bad in ("cubic:1", "geometric:x"):
        with pytest.raises(ValueError):
            parse_weight(bad)


def test_rate_conversion():
    assert rate_convert(Exponential(1.0)).c == pytest.approx(2.718281828, abs=1e-9)
    assert rate_convert(Geometric(math.exp(1 / 5))).f == pytest.approx(5, rel=1e-12)
    for f in (0.3, 1.0, 7.5, 1e3):
        assert rate_convert(rate_convert(Exponential(f))).f == pytest.approx(f, rel=1e-12)


def test_two_window_depth(p10, two_windows):
    c = 1.7
    assert depth_mean(p10, two_windows, Geometric(c), 4) == pytest.approx((c**2 + c) / 2, rel=1e-15)
    sc = score(p10, two_windows, Geometric(1.1))
    assert sc.value == pytest.approx(1.155, rel=1e-12)
    assert sc.argmin == 4
    assert depth_mean(p10, two_windows, Geometric(1.1), 5) == pytest.approx(1.155, rel=1e-12)
    assert sc.log_value == pytest.approx(math.log(1.155), rel=1e-12)


def test_full_cover_is_infinite(p10):
    full = Cover(p10, [range(10)])
    assert depth_mean(p10, full, Exponential(1), 3) == INFINITE
    assert ald_score(p10, full, Geometric(1.01)) == INFINITE


def test_singleton_partition_scores_c(p10):
    singles = Cover(p10, [[i] for i in range(10)])
    assert ald_score(p10, singles, Geometric(1.3)) == pytest.approx(1.3)


def test_member_depths_are_at_least_the_separation(p10):
    # a member's boundary distance is never 0 at its own points, so every term exceeds 1
    c = Cover(p10, [range(6), range(6, 10), [0]])
    assert depth_mean(p10, c, FunctionWeight(lambda t: t), 0) == (6 + 1) / 2
    assert all(depth_mean(p10, c, Geometric(1.2), x) >= 1.2 for x in range(10))


def test_log_mean_agrees(p10, two_windows):
    for x in range(10):
        lm = log_depth_mean(p10, two_windows, Exponential(0.5), x)
        assert lm == pytest.approx(math.log(depth_mean(p10, two_windows, Exponential(0.5), x)), rel=1e-12)
    assert log_depth_mean(p10, two_windows, Exponential(1e-3), 0) == pytest.approx(6000 + 0.0, rel=1e-12)


def test_rate_sequence_validation(p10, two_windows):
    RateSequence.exponential({1: two_windows, 2: two_windows}, lambda k: k)
    with pytest.raises(MonotonicityError):
        RateSequence.exponential({1: two_windows, 2: two_windows}, lambda k: 3 - k)
    with pytest.raises(MonotonicityError):
        RateSequence.geometric({1: two_windows, 2: two_windows}, lambda k: 1 + k)


def test_full_covers_pass_everything(p10):
    full = Cover(p10, [range(10)])
    rep = check_ald_condition(p10, RateSequence.exponential({1: full, 2: full}, float), 0.5)
    assert rep["all_pass"] and rep["rows"][0]["score"] == "inf"


def test_shrinking_rate_eventually_fails(p10, two_windows):
    seq = RateSequence.geometric({k: two_windows for k in (1, 2, 5, 20)}, lambda k: 1 + 1 / k)
    rep = check_ald_condition(p10, seq, 0.1)
    scores = [r["score"] for r in rep["rows"]]
    for (k, s) in zip((1, 2, 5, 20), scores):
        c = 1 + 1 / k
        assert s == pytest.approx((c + c * c) / 2)
    assert rep["rows"][0]["pass"] and not rep["rows"][-1]["pass"]


def test_long_path_exponential_prefix():
    p = path_space(200)
    covers = {k: generate_cover(p, CoverSpec("intervals", length=2 * k, overlap=k)) for k in (2, 4, 8, 16)}
    rep = check_ald_condition(p, RateSequence.exponential(covers, float), 0.1, targets={16: 1.5}, trend_from=2)
    assert rep["all_pass"]
    assert all(r["best_epsilon"] > 0.1 for r in rep["rows"])


def test_amplification_bound_values():
    assert amplification_bound(1, 16) == 1.6875
    assert amplification_bound(1, 1) == 0.5
    assert amplification_bound(0.2, 100) == pytest.approx(0.1 * 1.1**9, rel=1e-12)
    assert amplification_bound(0.2, 100) == pytest.approx(0.23579, abs=1e-5)


def test_amplification_on_windows():
    p = path_space(200)
    cover = generate_cover(p, CoverSpec("intervals", length=32, overlap=16))
    rep = amplification_check(p, cover, 0.5, 4.0)
    assert rep.passed and rep.amplified_score >= rep.bound
    full = Cover(p, [range(200)])
    assert amplification_check(p, full, 1.0, 9.0).passed


def test_amplification_premise(p10, two_windows):
    with pytest.raises(HypothesisFailed):
        amplification_check(p10, two_windows, 1.0, 100.0)


def test_profile_rows(p10, two_windows):
    rows = ald_profile_rows(p10, RateSequence({1: (two_windows, Geometric(1.1))}))
    assert len(rows) == 10 and rows[4][:2] == (1, 4)


@given(spaces_with_covers(), st.floats(0.2, 30))
def test_representation_identity(case, f):
    sp, cover = case
    g = Geometric(math.exp(1 / f))
    for x in range(sp.n):
        a, b = depth_mean(sp, cover, Exponential(f), x), depth_mean(sp, cover, g, x)
        assert a == b or abs(a - b) <= 1e-12 * max(a, b)


@given(spaces_with_covers(), st.floats(1.01, 3), st.floats(1.01, 3))
def test_score_monotone_in_base(case, c1, c2):
    sp, cover = case
    lo, hi = sorted((c1, c2))
    assert ald_score(sp, cover, Geometric(lo)) <= ald_score(sp, cover, Geometric(hi))
    assert ald_score(sp, cover, Geometric(lo)) >= 1


@given(spaces_with_covers(), st.floats(1.0, 50), st.floats(0.05, 2))
def test_amplification_whenever_premise_holds(case, f, eps):
    sp, cover = case
    if ald_score(sp, cover, Exponential(f)) >= 1 + eps:
        assert amplification_check(sp, cover, eps, f).passed


@given(spaces_with_covers(), st.floats(0.5, 10))
def test_depth_mean_matches_naive_loop(case, f):
    sp, cover = case
    w = Exponential(f)
    d = sp.dist.tolist()
    for x in range(sp.n):
        a, b = depth_mean(sp, cover, w, x), ref.depth_mean(d, cover.sets, w, x)
        assert a == b or abs(a - b) <= 1e-12 * max(a, b)
