"""Maps between finite metric spaces: coarse moduli and cover pullbacks.

For a large-scale Lipschitz, effectively proper map ``phi: X -> Y`` with
constants ``(A, C)`` and properness modulus ``S``, the pullback of a cover of
``Y`` satisfies, at every ``x`` in ``phi^-1(U)``,

    m_{phi^-1 U}(x) <= m_U(phi x)
    diam(phi^-1 U) <= S(R)                     (R bounds the diameters in U)
    (d_Y(phi x, Y \\ U) - C) / A <= d_X(x, X \\ phi^-1 U)

and depth transports through ``g_X(t) = g_Y(A t + C)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from aldkit.covers import Cover, boundary_distance, uniform_bound
from aldkit.depth import TOL, FunctionWeight, Weight, depth_mean
from aldkit.errors import SchemaError
from aldkit.space import INFINITE, FiniteMetricSpace, subset_diameter


@dataclass(frozen=True, eq=False)
class PointMap:
    domain: FiniteMetricSpace
    codomain: FiniteMetricSpace
    image: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.image) != self.domain.n:
            raise SchemaError(f"map has {len(self.image)} images for {self.domain.n} domain points")
        if any(not 0 <= y < self.codomain.n for y in self.image):
            raise SchemaError("map image leaves the codomain")

    def __call__(self, x: int) -> int:
        return self.image[x]

    @property
    def image_dist(self) -> np.ndarray:
        """``d_Y(phi x, phi x')`` for all domain pairs."""
        idx = np.asarray(self.image)
        return self.codomain.dist[np.ix_(idx, idx)]

    def to_json(self, domain_ref: str = "", codomain_ref: str = "") -> dict[str, Any]:
        return {"domain": domain_ref, "codomain": codomain_ref, "image": list(self.image)}


def compose(first: PointMap, second: PointMap) -> PointMap:
    if first.codomain is not second.domain:
        raise ValueError("maps do not compose")
    return PointMap(first.domain, second.codomain, tuple(second.image[y] for y in first.image))


@dataclass(frozen=True)
class MapModuli:
    A: float
    C: float
    S_table: dict[float, float]
    rho_table: dict[float, float]
    phi: PointMap | None = None

    def S(self, R: float) -> float:
        """``max d_X(x, x')`` over pairs with ``d_Y(phi x, phi x') <= R``."""
        if self.phi is None:
            keys = [r for r in self.S_table if r <= R]
            return self.S_table[max(keys)] if keys else 0.0
        dx, dy = self.phi.domain.dist, self.phi.image_dist
        sel = dy <= R
        return float(dx[sel].max()) if sel.any() else 0.0


def fit_moduli(phi: PointMap) -> MapModuli:
    """Exact ``rho`` and ``S`` tables by pair enumeration, plus a verified ``(A, C)``.

    ``A`` is the steepest slope ``d_Y/d_X`` among pairs whose domain distance
    reaches the median positive distance (at least 1), and ``C`` is then the
    least additive constant making ``d_Y <= A d_X + C`` hold everywhere.
    """
    if phi.domain.n < 2:
        raise ValueError("fitting moduli needs at least two domain points")
    dx, dy = phi.domain.dist, phi.image_dist
    iu = np.triu_indices(phi.domain.n, 1)
    px, py = dx[iu], dy[iu]
    rho = {0.0: 0.0} | {float(r): float(py[px <= r].max()) for r in np.unique(px)}
    s_tab = {float(R): float(px[py <= R].max()) if (py <= R).any() else 0.0 for R in np.unique(np.concatenate(([0.0], py)))}
    median = float(np.median(px))
    far = px >= median
    A = max(1.0, float((py[far] / px[far]).max()))
    C = max(0.0, float((py - A * px).max()))
    if (py > A * px + C + TOL * np.maximum(1.0, py)).any():  # pragma: no cover - arithmetic guard
        raise AssertionError("fitted Lipschitz pair does not verify")
    return MapModuli(A, C, s_tab, rho, phi)


def _worst(values: np.ndarray, iu: tuple[np.ndarray, np.ndarray]) -> tuple[float, tuple[int, int]]:
    k = int(np.argmin(values))
    return float(values[k]), (int(iu[0][k]), int(iu[1][k]))


def qi_embedding_check(phi: PointMap, A: float, C: float, tol: float = TOL) -> dict[str, Any]:
    """Both sides of ``d_X/A - C <= d_Y <= A d_X + C`` over all pairs, with worst-slack witnesses."""
    if A < 1 or C < 0:
        raise ValueError("need A >= 1 and C >= 0")
    if phi.domain.n < 2:
        return {"A": A, "C": C, "upper": {"slack": INFINITE, "pair": None, "pass": True},
                "lower": {"slack": INFINITE, "pair": None, "pass": True}, "pass": True}
    iu = np.triu_indices(phi.domain.n, 1)
    px, py = phi.domain.dist[iu], phi.image_dist[iu]
    up, up_pair = _worst(A * px + C - py, iu)
    lo, lo_pair = _worst(py - (px / A - C), iu)
    upper = {"slack": up, "pair": up_pair, "pass": up >= -tol}
    lower = {"slack": lo, "pair": lo_pair, "pass": lo >= -tol}
    return {"A": A, "C": C, "upper": upper, "lower": lower, "pass": upper["pass"] and lower["pass"]}


@dataclass
class Pullback:
    cover: Cover
    source: tuple[int, ...]  # codomain member index of each pulled-back member
    dropped: int


def pullback_cover(phi: PointMap, cover: Cover) -> Pullback:
    """Preimages of the members, in order; empty preimages are dropped and counted."""
    if cover.space is not phi.codomain:
        raise ValueError("cover is not on the map's codomain")
    img = np.asarray(phi.image)
    sets, source = [], []
    for j in range(len(cover)):
        pre = np.flatnonzero(cover.member[j][img])
        if pre.size:
            sets.append(pre.tolist())
            source.append(j)
    return Pullback(Cover(phi.domain, sets), tuple(source), len(cover) - len(sets))


def _ext(v: float) -> float | str:
    return "inf" if v == INFINITE else v


def pullback_certificate(
    phi: PointMap,
    moduli: MapModuli,
    cover: Cover,
    R_bound: float | None = None,
    tol: float = TOL,
) -> dict[str, Any]:
    """Verify the three per-instance inequalities for the pulled-back cover.

    A violation means the supplied moduli are wrong for this map.
    """
    R = uniform_bound(cover) if R_bound is None else R_bound
    if R < uniform_bound(cover) - tol:
        raise ValueError("R_bound is below the cover's uniform bound")
    pb = pullback_cover(phi, cover)
    pc = pb.cover
    A, C = moduli.A, moduli.C

    mult_violations = [
        x for x in range(phi.domain.n) if pc.multiplicities[x] > cover.multiplicities[phi.image[x]]
    ]
    s_r = moduli.S(R)
    diam_rows = [subset_diameter(phi.domain, s) for s in pc.sets]
    diam_violations = [i for i, d in enumerate(diam_rows) if d > s_r + tol]

    worst_slack, worst_at = INFINITE, None
    bd_violations = []
    for i, j in enumerate(pb.source):
        for x in pc.sets[i]:
            d_y = boundary_distance(cover, phi.image[x], j)
            d_x = boundary_distance(pc, x, i)
            if d_x == INFINITE:
                slack = INFINITE
            elif d_y == INFINITE:
                slack = -INFINITE
            else:
                slack = d_x - (d_y - C) / A
            if slack < worst_slack:
                worst_slack, worst_at = slack, {"x": x, "member": j, "d_X": _ext(d_x), "d_Y": _ext(d_y)}
            if slack < -tol:
                bd_violations.append((x, j))
    return {
        "A": A,
        "C": C,
        "R_bound": R,
        "S_of_R": s_r,
        "dropped_members": pb.dropped,
        "multiplicity": {"violations": mult_violations, "pass": not mult_violations},
        "diameter": {"max": max(diam_rows), "violations": diam_violations, "pass": not diam_violations},
        "boundary": {
            "worst_slack": _ext(worst_slack),
            "worst_at": worst_at,
            "violations": bd_violations,
            "pass": not bd_violations,
        },
        "pass": not (mult_violations or diam_violations or bd_violations),
    }


def transport_weight(g_Y: Callable[[float], float], A: float, C: float) -> Weight:
    """``g_X(t) = g_Y(A t + C)``."""
    if A < 1 or C < 0:
        raise ValueError("need A >= 1 and C >= 0")
    return FunctionWeight(lambda t: g_Y(A * t + C), f"transported(A={A!r}, C={C!r})")


def ald_transport_check(
    phi: PointMap,
    moduli: MapModuli,
    cover: Cover,
    g_Y: Callable[[float], float],
    tol: float = TOL,
) -> dict[str, Any]:
    """Domain score of the pullback under ``g_X`` against the codomain score under ``g_Y``."""
    w_y = g_Y if isinstance(g_Y, Weight) else FunctionWeight(g_Y)
    w_x = transport_weight(w_y, moduli.A, moduli.C)
    pb = pullback_cover(phi, cover)
    left = min(depth_mean(phi.domain, pb.cover, w_x, x) for x in range(phi.domain.n))
    right = min(depth_mean(phi.codomain, cover, w_y, y) for y in range(phi.codomain.n))
    if left == INFINITE:
        ok = True
    elif right == INFINITE:
        ok = False
    else:
        ok = left >= right - tol * max(1.0, abs(right))
    return {"domain_score": _ext(left), "codomain_score": _ext(right), "pass": bool(ok)}


def qi_pair_report(phi: PointMap, psi: PointMap, A: float, C: float) -> dict[str, Any]:
    """Both embedding checks plus the displacement suprema of the round trips.

    No pass threshold is attached to the displacements: there is no constant to
    compare them against.
    """
    if phi.domain is not psi.codomain or phi.codomain is not psi.domain:
        raise ValueError("maps are not mutually inverse in shape")
    back_x = compose(phi, psi)
    back_y = compose(psi, phi)
    disp_x = max(phi.domain.d(x, back_x(x)) for x in range(phi.domain.n))
    disp_y = max(phi.codomain.d(y, back_y(y)) for y in range(phi.codomain.n))
    return {
        "forward": qi_embedding_check(phi, A, C),
        "backward": qi_embedding_check(psi, A, C),
        "displacement_domain": disp_x,
        "displacement_codomain": disp_y,
    }


def load_map(path: str | Path, domain: FiniteMetricSpace, codomain: FiniteMetricSpace) -> PointMap:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"map file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"map file {path} is not valid JSON: {exc}") from None
    if "image" not in data:
        raise SchemaError('map JSON needs "image"')
    return PointMap(domain, codomain, tuple(int(i) for i in data["image"]))


def embedding(domain: FiniteMetricSpace, codomain: FiniteMetricSpace, image: Sequence[int]) -> PointMap:
    return PointMap(domain, codomain, tuple(int(i) for i in image))
