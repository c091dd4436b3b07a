"""Subexponential comparison functions: the piecewise construction from
``(S_k, c_k)`` and threshold extraction ``T_k`` from a given ``g``.

The piecewise function is implemented exactly as

    g(t) = c_1^t                                        0 <= t <= S_1
    g(t) = g(S_{k-1}) + c_k^(S_{k-1}+t) - c_k^(S_{k-1})   S_{k-1} < t <= S_k

which jumps upward at every interior knot. The jumps are reported, not
smoothed away.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from aldkit.covers import Cover
from aldkit.depth import TOL, FunctionWeight, Geometric, RateSequence, Tabulated, Weight, depth_mean
from aldkit.errors import MonotonicityError, SchemaError, ThresholdNotFound
from aldkit.space import INFINITE, FiniteMetricSpace

GRID_STEP = 0.25


@dataclass(frozen=True)
class PiecewiseG:
    S: tuple[float, ...]
    c: tuple[float, ...]
    knot_values: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        S, c = self.S, self.c
        if len(S) != len(c) or not S:
            raise SchemaError("S and c need equal, nonzero lengths")
        if S[0] <= 0 or any(b <= a for a, b in zip(S, S[1:])):
            raise MonotonicityError("S must be positive and strictly increasing")
        if any(ck <= 1 for ck in c) or any(b > a for a, b in zip(c, c[1:])):
            raise MonotonicityError("c must exceed 1 and be nonincreasing")
        vals = [c[0] ** S[0]]
        for k in range(1, len(S)):
            vals.append(self._piece(k, S[k], vals[-1]))
        object.__setattr__(self, "knot_values", tuple(vals))

    def _piece(self, k: int, t: float, g_prev: float) -> float:
        s_prev = self.S[k - 1]
        return g_prev + self.c[k] ** (s_prev + t) - self.c[k] ** s_prev

    def piece_index(self, t: float) -> int:
        """0-based index of the piece governing ``t``; past ``S_last`` the last one."""
        return min(bisect.bisect_left(self.S, t), len(self.S) - 1)

    def extrapolated(self, t: float) -> bool:
        return t > self.S[-1]

    def __call__(self, t: float) -> float:
        if t == INFINITE:
            return INFINITE
        if t < 0:
            raise ValueError("g is defined on t >= 0")
        k = self.piece_index(t)
        if k == 0:
            return self.c[0] ** t
        return self._piece(k, t, self.knot_values[k - 1])

    def knot_jumps(self) -> list[float]:
        """``g(S_k+) - g(S_k)`` at each interior knot."""
        return [self.c[k] ** (2 * self.S[k - 1]) - self.c[k] ** self.S[k - 1] for k in range(1, len(self.S))]

    def as_weight(self) -> Weight:
        return FunctionWeight(self, f"piecewise:{len(self.S)} pieces")

    def to_json(self) -> dict[str, Any]:
        return {"kind": "piecewise", "S": list(self.S), "c": list(self.c)}


def build_g(S: Sequence[float], c: Sequence[float]) -> PiecewiseG:
    return PiecewiseG(tuple(float(s) for s in S), tuple(float(x) for x in c))


def grid(stop: float, step: float = GRID_STEP, start: float = 0.0) -> np.ndarray:
    n = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


def _ratio_tail(values: np.ndarray) -> int:
    """Index from which a sampled sequence is nonincreasing through its end."""
    rises = np.flatnonzero(values[1:] > values[:-1] * (1 + 1e-12))
    return int(rises[-1]) + 1 if rises.size else 0


def verify_g_properties(
    g: PiecewiseG, b_list: Sequence[float], t_grid: np.ndarray | None = None
) -> dict[str, Any]:
    """Grid checks of monotonicity, the envelopes around ``g`` and the decay of ``g/b^t``.

    The lower envelope is ``g(t) >= c_k^t`` for ``t <= S_k``; the upper one is
    ``g(t) <= g(S_{k-1}) + c_k^(S_{k-1}+t) - c_k^(S_{k-1})`` for ``t >= S_{k-1}``.

    For each ``k`` and each ``b > c_k`` two facts are reported: whether
    ``g(t)/b^t`` is nonincreasing on every grid point strictly past
    ``S_{k-1}`` (``from_knot``), and the grid value from which it is
    nonincreasing through the end of the grid (``tail_start``).
    """
    ts = grid(10 * g.S[-1]) if t_grid is None else np.asarray(t_grid, dtype=float)
    gv = np.array([g(t) for t in ts])
    strict = bool(np.all(np.diff(gv) > 0))
    lower = []
    for k, (s_k, c_k) in enumerate(zip(g.S, g.c)):
        sel = ts <= s_k
        gap = gv[sel] - c_k ** ts[sel]
        lower.append({"k": k + 1, "min_gap": float(gap.min()) if gap.size else 0.0, "pass": bool((gap >= -TOL).all())})
    upper = []
    for k in range(1, len(g.S)):
        s_prev, c_k = g.S[k - 1], g.c[k]
        sel = ts >= s_prev
        env = g.knot_values[k - 1] + c_k ** (s_prev + ts[sel]) - c_k**s_prev
        excess = gv[sel] - env
        upper.append({"k": k + 1, "max_excess": float(excess.max()), "pass": bool((excess <= TOL * np.maximum(1, env)).all())})
    decay = []
    for k, c_k in enumerate(g.c):
        s_prev = g.S[k - 1] if k else 0.0
        for b in b_list:
            if b <= c_k:
                continue
            sel = ts > s_prev if k else ts >= 0
            t_sel = ts[sel]
            # ratio in log space: g can be large and b^t overflows early
            ratio = np.exp(np.log(gv[sel]) - t_sel * math.log(b))
            tail = _ratio_tail(ratio)
            decay.append(
                {
                    "k": k + 1,
                    "b": b,
                    "from": s_prev,
                    "from_knot": tail == 0,
                    "tail_start": float(t_sel[tail]) if t_sel.size else s_prev,
                    "eventually_nonincreasing": bool(t_sel.size and t_sel[tail] <= g.S[-1]),
                }
            )
    return {
        "strictly_increasing": strict,
        "lower_envelope": lower,
        "upper_envelope": upper,
        "decay": decay,
        "knot_jumps": g.knot_jumps(),
        "grid": [float(ts[0]), float(ts[-1]), len(ts)],
    }


@dataclass(frozen=True)
class ThresholdTable:
    T: dict[int, float]
    search_cap: float
    step: float

    def __getitem__(self, k: int) -> float:
        return self.T[k]


def thresholds_from_g(
    g: Callable[[float], float], k_max: int, search_cap: float, step: float = GRID_STEP
) -> ThresholdTable:
    """Least grid ``T_k`` with ``g(t) <= (1+1/k)^t`` on every grid point of ``[T_k, search_cap]``.

    The table is made nondecreasing by running maxima, so each entry may
    exceed the least admissible value; it stays valid.
    """
    ts = grid(search_cap, step)
    log_g = np.array([math.log(g(t)) for t in ts])
    table: dict[int, float] = {}
    running = 0.0
    for k in range(1, k_max + 1):
        ok = log_g <= ts * math.log1p(1.0 / k) + 1e-12
        if not ok[-1]:
            raise ThresholdNotFound(f"g exceeds (1+1/{k})^t at the search cap {search_cap}")
        bad = np.flatnonzero(~ok)
        t_k = float(ts[bad[-1] + 1]) if bad.size else float(ts[0])
        running = max(running, t_k)
        table[k] = running
    return ThresholdTable(table, float(ts[-1]), step)


def halving_rescale(
    space: FiniteMetricSpace,
    sequence: RateSequence,
    thresholds: ThresholdTable,
    tol: float = TOL,
) -> dict[str, Any]:
    """Turn a ``g``-weighted sequence into geometric rates ``1 + 1/k``.

    A term survives when its ``g``-score is at least ``2 g(T_k)``. For
    survivors the report certifies, per point, that the mean over members with
    ``d >= T_k`` is at least ``g(T_k)``, and that the ``(1+1/k)``-score is at
    least ``g(T_k)`` as well.
    """
    rows = []
    survivors: dict[int, tuple[Cover, Weight]] = {}
    for k, (cover, g) in sequence:
        t_k = thresholds[k]
        g_t = g(t_k)
        geo = Geometric(1.0 + 1.0 / k)
        g_score = min(depth_mean(space, cover, g, x) for x in range(space.n))
        row: dict[str, Any] = {"k": k, "T_k": t_k, "g_T_k": g_t, "g_score": g_score}
        row["survives"] = bool(g_score >= 2 * g_t - tol)
        if row["survives"]:
            deep_min, geo_min, beyond = INFINITE, INFINITE, False
            for x in range(space.n):
                ds = [d for _, d in cover.depths_at(x)]
                deep = [d for d in ds if d >= t_k]
                beyond |= any(d != INFINITE and d > thresholds.search_cap for d in deep)
                deep_mean = math.fsum(g(d) for d in deep) / len(ds) if INFINITE not in deep else INFINITE
                deep_min = min(deep_min, deep_mean)
                geo_min = min(geo_min, depth_mean(space, cover, geo, x))
            row.update(
                deep_mean_min=deep_min,
                geometric_score=geo_min,
                chain_pass=bool(deep_min >= g_t - tol and geo_min >= g_t - tol),
                beyond_search_cap=beyond,
            )
            survivors[k] = (cover, geo)
        rows.append(row)
    return {
        "rows": rows,
        "sequence": RateSequence(survivors),
        "certified": {r["k"]: r["g_T_k"] for r in rows if r["survives"]},
        "all_pass": all(r.get("chain_pass", True) for r in rows),
    }


def g_from_json(data: Mapping[str, Any]) -> Weight | PiecewiseG:
    kind = data.get("kind")
    if kind == "piecewise":
        return build_g(data["S"], data["c"])
    if kind == "table":
        return Tabulated(tuple(map(float, data["t"])), tuple(map(float, data["g"])))
    raise SchemaError(f"unknown g kind {kind!r}")


def load_g(path) -> Weight | PiecewiseG:
    try:
        with open(path) as fh:
            return g_from_json(json.load(fh))
    except FileNotFoundError:
        raise SchemaError(f"g file not found: {path}") from None
    except (json.JSONDecodeError, KeyError) as exc:
        raise SchemaError(f"g file {path} is malformed: {exc}") from None
