"""The asymptotically-large-depth functional and the rate conversions between its forms.

For a point ``x`` and a weight ``w`` the depth mean is

    (1 / m(x)) * sum_{U containing x} w(d(x, X \\ U))

and the score of a cover is its minimum over points. Members equal to the
whole space have infinite boundary distance, and the infinity propagates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np
from scipy.special import logsumexp

from aldkit.covers import Cover, global_multiplicity, uniform_bound
from aldkit.errors import HypothesisFailed, MonotonicityError
from aldkit.space import INFINITE, FiniteMetricSpace

TOL = 1e-9


class Weight:
    """A monotone nondecreasing map from extended distances to ``[0, inf]``."""

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def log(self, t: float) -> float:
        v = self(t)
        return math.log(v) if v > 0 else -math.inf

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class Exponential(Weight):
    """``t -> e^(t / f)``."""

    f: float

    def __post_init__(self) -> None:
        if not self.f > 0:
            raise ValueError("Exponential weight needs f > 0")

    def __call__(self, t: float) -> float:
        if t == INFINITE:
            return INFINITE
        try:
            return math.exp(t / self.f)
        except OverflowError:  # float overflow; log() keeps the exact value
            return INFINITE

    def log(self, t: float) -> float:
        return INFINITE if t == INFINITE else t / self.f

    def describe(self) -> str:
        return f"exponential:{self.f!r}"


@dataclass(frozen=True)
class Geometric(Weight):
    """``t -> c^t`` with ``c > 1``."""

    c: float

    def __post_init__(self) -> None:
        if not self.c > 1:
            raise ValueError("Geometric weight needs c > 1")

    def __call__(self, t: float) -> float:
        if t == INFINITE:
            return INFINITE
        try:
            return self.c**t
        except OverflowError:
            return INFINITE

    def log(self, t: float) -> float:
        return INFINITE if t == INFINITE else t * math.log(self.c)

    def describe(self) -> str:
        return f"geometric:{self.c!r}"


@dataclass(frozen=True)
class Tabulated(Weight):
    """Piecewise-linear interpolation of a nondecreasing sample table.

    Past the last sample the weight is held at ``g_max`` (the last value unless
    given); an infinite argument always maps to infinity.
    """

    t: tuple[float, ...]
    g: tuple[float, ...]
    g_max: float | None = None

    def __post_init__(self) -> None:
        if len(self.t) != len(self.g) or not self.t:
            raise ValueError("table needs matching, nonempty t and g")
        if any(b <= a for a, b in zip(self.t, self.t[1:])):
            raise MonotonicityError("table abscissae must be strictly increasing")
        if any(b < a for a, b in zip(self.g, self.g[1:])):
            raise MonotonicityError("tabulated weight must be nondecreasing")
        if self.g_max is not None and self.g_max < self.g[-1]:
            raise MonotonicityError("g_max below the last tabulated value")

    def __call__(self, t: float) -> float:
        if t == INFINITE:
            return INFINITE
        if t > self.t[-1]:
            return self.g[-1] if self.g_max is None else self.g_max
        return float(np.interp(t, self.t, self.g))

    def describe(self) -> str:
        return f"table:{len(self.t)} samples on [{self.t[0]}, {self.t[-1]}]"


@dataclass(frozen=True)
class FunctionWeight(Weight):
    """Wraps any monotone callable (piecewise constructions, transported weights)."""

    fn: Callable[[float], float]
    name: str = "function"

    def __call__(self, t: float) -> float:
        return INFINITE if t == INFINITE else float(self.fn(t))

    def describe(self) -> str:
        return self.name


def parse_weight(text: str) -> Weight:
    """``exponential:F``, ``geometric:C`` or ``linear:A`` (``t -> A*t``)."""
    kind, _, arg = text.partition(":")
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"bad weight spec {text!r}") from None
    if kind in ("exponential", "exp"):
        return Exponential(value)
    if kind in ("geometric", "geo"):
        return Geometric(value)
    if kind == "linear":
        return FunctionWeight(lambda t, a=value: a * t, f"linear:{value!r}")
    raise ValueError(f"unknown weight kind {kind!r}")


def rate_convert(weight: Exponential | Geometric) -> Geometric | Exponential:
    """Swap between ``e^(t/f)`` and ``c^t`` with ``c = e^(1/f)``."""
    if isinstance(weight, Exponential):
        return Geometric(math.exp(1.0 / weight.f))
    if isinstance(weight, Geometric):
        return Exponential(1.0 / math.log(weight.c))
    raise TypeError(f"cannot convert {weight!r}")


def depth_terms(cover: Cover, weight: Weight, x: int) -> list[float]:
    return [weight(d) for _, d in cover.depths_at(x)]


def depth_mean(space: FiniteMetricSpace, cover: Cover, weight: Weight, x: int) -> float:
    """Average weight of ``x``'s boundary distances over the members containing it."""
    _check_space(space, cover)
    terms = depth_terms(cover, weight, x)
    return math.fsum(terms) / len(terms) if INFINITE not in terms else INFINITE


def log_depth_mean(space: FiniteMetricSpace, cover: Cover, weight: Weight, x: int) -> float:
    """Natural log of :func:`depth_mean`, finite even where the mean overflows."""
    _check_space(space, cover)
    logs = [weight.log(d) for _, d in cover.depths_at(x)]
    if INFINITE in logs:
        return INFINITE
    if max(logs) == -math.inf:
        return -math.inf
    return float(logsumexp(logs)) - math.log(len(logs))


def depth_profile(space: FiniteMetricSpace, cover: Cover, weight: Weight) -> list[float]:
    return [depth_mean(space, cover, weight, x) for x in range(space.n)]


@dataclass(frozen=True)
class Score:
    value: float
    log_value: float
    argmin: int


def score(space: FiniteMetricSpace, cover: Cover, weight: Weight) -> Score:
    """Minimum depth mean; ties go to the lowest point index.

    When every mean overflows a float, the minimizer is chosen by log value.
    """
    means = depth_profile(space, cover, weight)
    arg = min(range(space.n), key=means.__getitem__)
    if means[arg] == INFINITE:
        logs = [log_depth_mean(space, cover, weight, x) for x in range(space.n)]
        arg = min(range(space.n), key=logs.__getitem__)
    return Score(means[arg], log_depth_mean(space, cover, weight, arg), arg)


def ald_score(space: FiniteMetricSpace, cover: Cover, weight: Weight) -> float:
    return score(space, cover, weight).value


def _check_space(space: FiniteMetricSpace, cover: Cover) -> None:
    if cover.space is not space:
        raise ValueError("cover belongs to a different space")


@dataclass
class RateSequence:
    """Finitely many terms ``k -> (cover_k, weight_k)`` of a depth sequence.

    ``declared`` optionally asserts the rate trend over the stored prefix:
    ``"f_nondecreasing"`` for exponential weights or ``"c_nonincreasing"`` for
    geometric ones. It is validated at construction.
    """

    entries: dict[int, tuple[Cover, Weight]]
    declared: str | None = None

    def __post_init__(self) -> None:
        self.entries = dict(sorted(self.entries.items()))
        for k, (_, w) in self.entries.items():
            if isinstance(w, Exponential) and not w.f > 0:
                raise ValueError(f"f({k}) must be positive")
            if isinstance(w, Geometric) and not w.c > 1:
                raise ValueError(f"c({k}) must exceed 1")
        if self.declared == "f_nondecreasing":
            fs = [w.f for _, w in self.entries.values()]
            if any(b < a for a, b in zip(fs, fs[1:])):
                raise MonotonicityError("declared f nondecreasing but the stored prefix is not")
        elif self.declared == "c_nonincreasing":
            cs = [w.c for _, w in self.entries.values()]
            if any(b > a for a, b in zip(cs, cs[1:])):
                raise MonotonicityError("declared c nonincreasing but the stored prefix is not")
        elif self.declared is not None:
            raise ValueError(f"unknown declaration {self.declared!r}")

    @classmethod
    def exponential(cls, covers: Mapping[int, Cover], f: Callable[[int], float]) -> "RateSequence":
        return cls({k: (c, Exponential(f(k))) for k, c in covers.items()}, "f_nondecreasing")

    @classmethod
    def geometric(cls, covers: Mapping[int, Cover], c: Callable[[int], float]) -> "RateSequence":
        return cls({k: (cv, Geometric(c(k))) for k, cv in covers.items()}, "c_nonincreasing")

    def __iter__(self):
        return iter(self.entries.items())


def _ext(v: float) -> float | str:
    return "inf" if v == INFINITE else v


def check_ald_condition(
    space: FiniteMetricSpace,
    sequence: RateSequence,
    epsilon: float,
    targets: Mapping[int, float] | None = None,
    trend_from: int | None = None,
    tol: float = TOL,
) -> dict[str, Any]:
    """Per-term uniform bound, multiplicity and score against ``1 + epsilon``.

    ``targets`` gives the finite-prefix surrogate for the "score tends to
    infinity" forms: each listed ``k`` must reach its target. ``trend_from``
    asks for nondecreasing scores from that index on.
    """
    rows = []
    for k, (cover, weight) in sequence:
        sc = score(space, cover, weight)
        row = {
            "k": k,
            "S_k": uniform_bound(cover),
            "m_global": global_multiplicity(cover),
            "score": _ext(sc.value),
            "log_score": _ext(sc.log_value),
            "best_epsilon": _ext(sc.value - 1.0),
            "pass": bool(sc.value >= 1.0 + epsilon - tol),
            "argmin_point": sc.argmin,
        }
        if targets and k in targets:
            row["target"] = targets[k]
            row["target_pass"] = bool(sc.value >= targets[k] - tol)
        rows.append(row)
    report: dict[str, Any] = {"epsilon": epsilon, "rows": rows}
    report["all_pass"] = all(r["pass"] for r in rows) and all(r.get("target_pass", True) for r in rows)
    if trend_from is not None:
        tail = [r for r in rows if r["k"] >= trend_from]
        vals = [math.inf if r["score"] == "inf" else r["score"] for r in tail]
        report["trend_from"] = trend_from
        report["trend_nondecreasing"] = all(b >= a - tol for a, b in zip(vals, vals[1:]))
    return report


def amplification_bound(epsilon: float, f_k: float) -> float:
    """Lower bound on the score at rate ``sqrt(f_k)`` given score ``>= 1+epsilon`` at ``f_k``.

    Only meaningful for ``f_k >= 1``; below that the exponent is negative and
    the estimate runs the wrong way.
    """
    return epsilon / 2 * (1 + epsilon / 2) ** (math.sqrt(f_k) - 1)


@dataclass
class AmplificationReport:
    epsilon: float
    f: float
    premise_score: float
    amplified_score: float
    bound: float
    a_sizes: list[int] = field(default_factory=list)
    b_sizes: list[int] = field(default_factory=list)
    point_pass: list[bool] = field(default_factory=list)

    @property
    def a_nonempty(self) -> bool:
        return all(a > 0 for a in self.a_sizes)

    @property
    def passed(self) -> bool:
        return self.a_nonempty and all(self.point_pass)


def amplification_check(
    space: FiniteMetricSpace, cover: Cover, epsilon: float, f_k: float, tol: float = TOL
) -> AmplificationReport:
    """Split each point's members by whether ``e^(d/f) >= 1 + epsilon/2`` and
    confirm the score at rate ``sqrt(f)`` clears :func:`amplification_bound`."""
    premise = ald_score(space, cover, Exponential(f_k))
    if premise < 1 + epsilon - tol:
        raise HypothesisFailed(f"score {premise!r} at f={f_k} is below 1+epsilon={1 + epsilon}")
    root = Exponential(math.sqrt(f_k))
    bound = amplification_bound(epsilon, f_k)
    cut = math.log1p(epsilon / 2) * f_k  # e^(d/f) >= 1+eps/2  <=>  d >= f*log(1+eps/2)
    rep = AmplificationReport(epsilon, f_k, premise, INFINITE, bound)
    for x in range(space.n):
        ds = [d for _, d in cover.depths_at(x)]
        n_a = sum(1 for d in ds if d >= cut)
        rep.a_sizes.append(n_a)
        rep.b_sizes.append(len(ds) - n_a)
        mean = depth_mean(space, cover, root, x)
        rep.amplified_score = min(rep.amplified_score, mean)
        rep.point_pass.append(bool(mean >= bound - tol))
    return rep


def ald_profile_rows(space: FiniteMetricSpace, sequence: RateSequence) -> list[tuple[int, int, float]]:
    """``(k, x, depth_mean)`` rows for the per-point CSV export."""
    out = []
    for k, (cover, weight) in sequence:
        for x in range(space.n):
            out.append((k, x, depth_mean(space, cover, weight, x)))
    return out

