import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aldkit import reference as ref
from aldkit.covers import Cover
from aldkit.depth import Exponential, RateSequence, ald_score
from aldkit.errors import DegenerateWitness, InfiniteDepth
from aldkit.generators import CoverSpec, generate_cover, path_space
from aldkit.witness import (
    L1Function,
    WitnessFamily,
    build_witness,
    choose_anchors,
    norm_identity_gap,
    property_a_report,
    save_witness,
    symmetric_variation_ratio,
    support_radius_check,
    theoretical_variation_bound,
    variation_ratio,
)

from conftest import spaces_with_covers


def test_two_window_family(p10, two_windows):
    fam = build_witness(p10, two_windows, 1.0)
    assert fam.anchors == (0, 4)
    a4 = fam.functions[4]
    assert a4.coeffs == pytest.approx({0: math.e**2 - 1, 4: math.e - 1})
    assert a4.norm == pytest.approx(math.e**2 + math.e - 2)
    assert a4.norm == pytest.approx(8.107338, abs=1e-6)
    assert a4.support == {0, 4}


def test_l1_function_prunes_and_measures():
    f = L1Function({3: 0.0, 1: 2.0, 2: 1.5})
    assert list(f.coeffs) == [1, 2] and f.norm == 3.5
    assert f.distance(L1Function({2: 0.5, 5: 1.0})) == 2.0 + 1.0 + 1.0


def test_full_member_is_infinite(p10):
    with pytest.raises(InfiniteDepth):
        build_witness(p10, Cover(p10, [range(10)]), 1.0)


def test_degenerate_witness_when_weights_vanish(p10, two_windows):
    # every member has depth >= the separation constant, so a zero witness
    # needs expm1(d/f) = 0, i.e. an infinite rate
    with pytest.raises(DegenerateWitness):
        build_witness(p10, two_windows, math.inf)


def test_support_examples(p10, two_windows):
    rep = support_radius_check(build_witness(p10, two_windows, 1.0))
    assert rep.passed and rep.radius == 5
    singles = Cover(p10, [[0, 1], [2, 3], [4, 5], [6, 7], [8, 9]])
    fam = build_witness(p10, singles, 2.0)
    assert support_radius_check(fam).passed
    assert all(fam.functions[x].support == {x - x % 2} for x in range(10))


def test_corrupted_anchor_is_caught(p10, two_windows):
    fam = build_witness(p10, two_windows, 1.0)
    bad = WitnessFamily(p10, two_windows, 1.0, (9, 4), [L1Function({9 if p == 0 else p: v for p, v in f.coeffs.items()}) for f in fam.functions])
    rep = support_radius_check(bad)
    assert not rep.passed and (0, 9) in rep.violations


def test_variation_ratio_oracle_values(p10, two_windows):
    fam = build_witness(p10, two_windows, 1.0)
    # frozen from the naive pair enumeration; the worst pair is (3, 2)
    assert variation_ratio(fam, 2) == pytest.approx(1.8083124016294254, rel=1e-12)
    assert variation_ratio(fam, 1) == 0.0
    punctured = Cover(p10, [range(1, 10), range(9)])
    fam2 = build_witness(p10, punctured, 10.0)
    assert variation_ratio(fam2, 2) == pytest.approx(0.2765021564314981, rel=1e-12)


def test_bound_values():
    assert theoretical_variation_bound(1, 16, 16) == pytest.approx(4 * (1 - math.exp(-1)))
    assert theoretical_variation_bound(1, 16, 16) == pytest.approx(2.52848, abs=1e-5)
    assert theoretical_variation_bound(1, 16, 1e-12) < 1e-12
    assert theoretical_variation_bound(1, 1e15, 4) < 1e-13


def test_anchor_rules(p10, two_windows):
    assert choose_anchors(two_windows, "min") == (0, 4)
    assert choose_anchors(two_windows, "deepest") == (0, 9)
    r = choose_anchors(two_windows, "random", seed=3)
    assert r == choose_anchors(two_windows, "random", seed=3)
    assert all(a in s for a, s in zip(r, two_windows.sets))
    with pytest.raises(ValueError):
        choose_anchors(two_windows, "best")


def test_property_a_on_long_path():
    p = path_space(200)
    covers = {k: generate_cover(p, CoverSpec("intervals", length=2 * k, overlap=k)) for k in (4, 8, 16, 32)}
    rep = property_a_report(p, RateSequence.exponential(covers, float), 0.5, [1, 2, 4, 8, 16])
    assert rep["all_pass"] and all(r["hypothesis"] for r in rep["rows"])
    assert all(t["monotone"] for t in rep["trend"].values())
    assert all(r["measured"] == 0 for r in rep["rows"] if r["R"] == 1)


def test_property_a_flags_missing_hypothesis(p10, two_windows):
    rep = property_a_report(p10, RateSequence.exponential({1: two_windows}, lambda k: 50.0), 1.0, [2])
    assert rep["rows"][0]["hypothesis"] is False
    assert rep["rows"][0]["bound"] > 0


def test_save_witness(tmp_path, p10, two_windows):
    path = tmp_path / "w.json"
    save_witness(build_witness(p10, two_windows, 1.0), path)
    assert '"anchors"' in path.read_text()


def _proper(case):
    sp, cover = case
    return not any(cover.is_full(j) for j in range(len(cover)))


@given(spaces_with_covers().filter(_proper), st.floats(0.5, 8), st.sampled_from(["min", "deepest", "random"]))
def test_witness_invariants(case, f, rule):
    sp, cover = case
    fam = build_witness(sp, cover, f, rule)
    assert support_radius_check(fam).passed
    assert norm_identity_gap(fam) <= 1e-12
    for x, fx in enumerate(fam.functions):
        assert fx.support <= {fam.anchors[j] for j, _ in cover.depths_at(x)}
        for y in range(sp.n):
            fy = fam.functions[y]
            assert fx.distance(fy) <= fx.norm + fy.norm + 1e-12


@given(spaces_with_covers().filter(_proper), st.floats(0.5, 8), st.floats(0.1, 2), st.floats(0.5, 6))
def test_bound_holds_under_premise(case, f, eps, R):
    sp, cover = case
    if ald_score(sp, cover, Exponential(f)) < 1 + eps:
        return
    for rule in ("min", "deepest"):
        fam = build_witness(sp, cover, f, rule)
        assert symmetric_variation_ratio(fam, R) <= theoretical_variation_bound(eps, f, R) + 1e-9
        assert symmetric_variation_ratio(fam, R) <= variation_ratio(fam, R)


def test_ordered_ratio_can_exceed_the_bound():
    # the premise holds (score e^2 >= 2), yet from x=1 to y=0 the ordered ratio
    # divides by the smaller norm: (e^4 - e^2) / (e^2 - 1) = e^2
    p3 = path_space(3)
    cover = Cover(p3, [[0, 1], [2]])
    assert ald_score(p3, cover, Exponential(0.5)) >= 2
    fam = build_witness(p3, cover, 0.5)
    bound = theoretical_variation_bound(1.0, 0.5, 2.0)
    assert variation_ratio(fam, 2.0) == pytest.approx(math.e**2)
    assert variation_ratio(fam, 2.0) > bound
    assert symmetric_variation_ratio(fam, 2.0) <= bound


@given(spaces_with_covers().filter(_proper), st.floats(0.5, 8), st.floats(0.5, 6))
def test_variation_ratio_matches_naive(case, f, R):
    sp, cover = case
    fam = build_witness(sp, cover, f)
    a = variation_ratio(fam, R)
    b = ref.variation_ratio(sp.dist.tolist(), cover.sets, f, fam.anchors, R)
    assert a == b or abs(a - b) <= 1e-12 * max(a, b)
