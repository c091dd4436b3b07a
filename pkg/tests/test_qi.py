import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aldkit.covers import Cover, multiplicity_at
from aldkit.depth import Exponential
from aldkit.errors import SchemaError
from aldkit.generators import path_space
from aldkit.qi import (
    MapModuli,
    PointMap,
    ald_transport_check,
    compose,
    embedding,
    fit_moduli,
    load_map,
    pullback_certificate,
    pullback_cover,
    qi_embedding_check,
    qi_pair_report,
    transport_weight,
)
from aldkit.space import from_distance_matrix

from conftest import spaces_with_covers


@pytest.fixture
def doubling(p10):
    return embedding(path_space(5), p10, [0, 2, 4, 6, 8])


def test_doubling_moduli(doubling):
    m = fit_moduli(doubling)
    assert (m.A, m.C) == (2.0, 0.0)
    assert m.S_table == {0.0: 0.0, 2.0: 1.0, 4.0: 2.0, 6.0: 3.0, 8.0: 4.0}
    assert m.rho_table == {0.0: 0.0, 1.0: 2.0, 2.0: 4.0, 3.0: 6.0, 4.0: 8.0}
    assert m.S(5) == 2 and m.S(8) == 4


def test_identity_and_constant_moduli(p10):
    ident = fit_moduli(embedding(p10, p10, range(10)))
    assert (ident.A, ident.C) == (1.0, 0.0)
    assert all(ident.S(r) == r for r in range(10))
    p5 = path_space(5)
    const = fit_moduli(embedding(p5, from_distance_matrix([[0]], 1), [0] * 5))
    assert (const.A, const.C) == (1.0, 0.0) and const.S_table == {0.0: 4.0}


def test_embedding_checks(doubling, p10):
    assert qi_embedding_check(doubling, 2, 0)["pass"]
    ident = qi_embedding_check(embedding(p10, p10, range(10)), 1, 0)
    assert ident["pass"] and ident["upper"]["slack"] == 0 and ident["lower"]["slack"] == 0
    p5 = path_space(5)
    rep = qi_embedding_check(embedding(p5, from_distance_matrix([[0]], 1), [0] * 5), 1, 1)
    assert not rep["pass"] and rep["upper"]["pass"]
    assert rep["lower"]["pair"] == (0, 4) and rep["lower"]["slack"] == -3
    with pytest.raises(ValueError):
        qi_embedding_check(doubling, 0.5, 0)


def test_pullback(doubling, p10, two_windows):
    pb = pullback_cover(doubling, two_windows)
    assert pb.cover.sets == ((0, 1, 2), (2, 3, 4)) and pb.dropped == 0
    ident = embedding(p10, p10, range(10))
    assert pullback_cover(ident, two_windows).cover.sets == two_windows.sets
    assert pullback_cover(doubling, Cover(p10, [range(10)])).cover.sets == (tuple(range(5)),)
    odd = Cover(p10, [[1, 3, 5, 7, 9], range(10)])
    assert pullback_cover(doubling, odd).dropped == 1


def test_certificate_is_tight(doubling, two_windows):
    cert = pullback_certificate(doubling, fit_moduli(doubling), two_windows)
    assert cert["pass"]
    assert cert["boundary"]["worst_slack"] == 0
    assert cert["boundary"]["worst_at"] == {"x": 0, "member": 0, "d_X": 3.0, "d_Y": 6.0}
    assert cert["S_of_R"] == 2 and cert["diameter"]["max"] == 2


def test_corrupted_moduli_are_caught(p10, two_windows):
    # skipping 1 stretches the first step, so A = 1 needs C = 1
    skip = embedding(p10, p10, [0, 2, 3, 4, 5, 6, 7, 8, 9, 9])
    assert qi_embedding_check(skip, 1, 1)["pass"] and not qi_embedding_check(skip, 1, 0)["pass"]
    honest = MapModuli(1.0, 1.0, {}, {}, skip)
    assert pullback_certificate(skip, honest, two_windows)["pass"]
    cert = pullback_certificate(skip, MapModuli(1.0, 0.0, {}, {}, skip), two_windows)
    assert not cert["pass"] and cert["boundary"]["worst_slack"] == -1
    assert cert["boundary"]["worst_at"] == {"x": 0, "member": 0, "d_X": 5.0, "d_Y": 6.0}


def test_transport(doubling, p10, two_windows):
    w = transport_weight(lambda t: t, 2, 3)
    assert w(5) == 13
    ident = transport_weight(Exponential(2.0), 1, 0)
    assert all(ident(t) == Exponential(2.0)(t) for t in (0, 1.5, 7))
    ratio = [transport_weight(lambda t: 1.5**t, 2, 0)(t) / 2.5**t for t in np.arange(0, 20, 0.25)]
    assert np.all(np.diff(ratio) < 0)
    rep = ald_transport_check(doubling, fit_moduli(doubling), two_windows, lambda t: t + 1)
    assert rep["pass"] and rep["domain_score"] == 3.0 and rep["codomain_score"] == 2.5


def test_transport_identity_and_full_cover(p10, two_windows):
    ident = embedding(p10, p10, range(10))
    rep = ald_transport_check(ident, fit_moduli(ident), two_windows, Exponential(1.5))
    assert rep["domain_score"] == rep["codomain_score"] and rep["pass"]
    full = ald_transport_check(ident, fit_moduli(ident), Cover(p10, [range(10)]), Exponential(1.5))
    assert full["domain_score"] == full["codomain_score"] == "inf"


def test_pair_report(p10):
    p5 = path_space(5)
    phi = embedding(p5, p10, [0, 2, 4, 6, 8])
    psi = embedding(p10, p5, [i // 2 for i in range(10)])
    rep = qi_pair_report(phi, psi, 2, 1)
    assert rep["forward"]["pass"] and rep["backward"]["pass"]
    assert rep["displacement_domain"] == 0 and rep["displacement_codomain"] == 1
    assert compose(phi, psi).image == tuple(range(5))


def test_map_validation(tmp_path, p10):
    p5 = path_space(5)
    with pytest.raises(SchemaError):
        PointMap(p5, p10, (0, 1))
    with pytest.raises(SchemaError):
        embedding(p5, p10, [0, 1, 2, 3, 10])
    path = tmp_path / "m.json"
    path.write_text('{"image": [0, 2, 4, 6, 8]}')
    assert load_map(path, p5, p10).image == (0, 2, 4, 6, 8)
    path.write_text("{}")
    with pytest.raises(SchemaError):
        load_map(path, p5, p10)


@given(spaces_with_covers(min_n=3), st.data())
def test_certificates_and_transport_on_random_maps(case, data):
    Y, cover = case
    n = data.draw(st.integers(2, 8))
    X = path_space(n)
    phi = embedding(X, Y, data.draw(st.lists(st.integers(0, Y.n - 1), min_size=n, max_size=n)))
    m = fit_moduli(phi)
    iu = np.triu_indices(n, 1)
    dx, dy = X.dist[iu], phi.image_dist[iu]
    assert np.all(dy <= m.A * dx + m.C + 1e-9)
    for R in np.unique(dy):
        assert dx[dy <= R].max() <= m.S(R)
    rho = [m.rho_table[r] for r in sorted(m.rho_table)]
    assert rho == sorted(rho)
    pb = pullback_cover(phi, cover).cover
    for x in range(n):
        assert multiplicity_at(pb, x) <= multiplicity_at(cover, phi(x))
    cert = pullback_certificate(phi, m, cover)
    assert cert["pass"]
    assert ald_transport_check(phi, m, cover, Exponential(data.draw(st.floats(0.5, 5))))["pass"]
