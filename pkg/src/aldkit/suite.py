"""The end-to-end verification suite: one row per acceptance check.

Rows may run concurrently (thread count from ``ALDKIT_THREADS``); they are
assembled in id order and the report carries no timings or thread counts, so
identical configurations produce byte-identical reports.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable

import numpy as np

from aldkit import reference as ref
from aldkit.asdim import ad_estimate, full_pool, subexp_dim_to_ald_check
from aldkit.corpus import build_corpus, random_cover, random_euclidean_space, random_graph_space
from aldkit.covers import (
    Cover,
    boundary_distance,
    global_multiplicity,
    is_lebesgue_number,
    lebesgue_ball_lower_bound,
    lebesgue_number_exact,
)
from aldkit.depth import TOL, Exponential, Geometric, RateSequence, ald_score, amplification_check, depth_mean
from aldkit.generators import cycle_space, generate_cover, CoverSpec, grid_space, path_space, tree_space
from aldkit.qi import ald_transport_check, embedding, fit_moduli, pullback_certificate
from aldkit.reporting import content_hash, dumps
from aldkit.subexp import build_g, verify_g_properties
from aldkit.witness import (
    L1Function,
    WitnessFamily,
    build_witness,
    property_a_report,
    support_radius_check,
    variation_ratio,
)

THREADS_ENV = "ALDKIT_THREADS"
INJECTIONS = ("corrupt-witness",)


@dataclass(frozen=True)
class SuiteConfig:
    filter: str | None = None
    inject: str | None = None
    tol: float = TOL
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.inject is not None and self.inject not in INJECTIONS:
            raise ValueError(f"unknown injection {self.inject!r}; choose from {INJECTIONS}")


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return default
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer")
    return n


def _rng(cfg: SuiteConfig, cid: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, cid])


def _rel_close(a: float, b: float, rel: float) -> bool:
    if a == b:
        return True
    return abs(a - b) <= rel * max(abs(a), abs(b))


def _has_full(cover: Cover) -> bool:
    return any(cover.is_full(j) for j in range(len(cover)))


# --- rows -------------------------------------------------------------------


def rate_representation(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Exponential(f) and Geometric(e^(1/f)) give the same score."""
    rng = _rng(cfg, 1)
    worst, failures, sizes = 0.0, [], []
    for i in range(50):
        kind = i % 6
        if kind == 0:
            sp = path_space(int(rng.integers(20, 201)))
        elif kind == 1:
            sp = cycle_space(int(rng.integers(20, 201)))
        elif kind == 2:
            w = int(rng.integers(3, 15))
            sp = grid_space(w, int(rng.integers(2, 200 // w + 1)))
        elif kind == 3:
            sp = tree_space(int(rng.integers(3, 5)), int(rng.integers(2, 4)))
        elif kind == 4:
            sp = random_graph_space(rng, int(rng.integers(10, 61)), extra=0.05, max_weight=3)
        else:
            sp = random_euclidean_space(rng, int(rng.integers(10, 61)))
        cover = random_cover(rng, sp)
        f = float(rng.uniform(1.0, 20.0))
        a = ald_score(sp, cover, Exponential(f))
        b = ald_score(sp, cover, Geometric(math.exp(1.0 / f)))
        err = 0.0 if a == b else abs(a - b) / max(abs(a), abs(b))
        worst = max(worst, err)
        sizes.append(sp.n)
        if not _rel_close(a, b, 1e-12):
            failures.append({"instance": i, "f": f, "exponential": a, "geometric": b})
    return not failures, {"instances": 50, "max_points": max(sizes), "max_relative_error": worst, "failures": failures}


def witness_variation(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Measured variation ratio under the closed-form bound, nonincreasing in k."""
    space = path_space(200)
    ks = (4, 8, 16, 32)
    covers = {k: generate_cover(space, CoverSpec("intervals", length=2 * k, overlap=k)) for k in ks}
    radii = (1, 2, 4, 8, 16)
    eps = 0.5
    rep = property_a_report(space, RateSequence.exponential(covers, float), eps, radii, tol=cfg.tol)
    hyp = all(r["hypothesis"] for r in rep["rows"])
    bound_ok = all(r["pass"] for r in rep["rows"])
    monotone = all(t["monotone"] for t in rep["trend"].values())
    rows = [{k: r[k] for k in ("k", "R", "measured", "bound", "slack")} for r in rep["rows"]]
    return hyp and bound_ok and monotone, {
        "epsilon": eps,
        "hypothesis_holds": hyp,
        "bound_holds": bound_ok,
        "nonincreasing_in_k": monotone,
        "rows": rows,
    }


def _corrupt(family: WitnessFamily) -> WitnessFamily:
    """Plant mass at the point farthest from 0 in the witness at 0."""
    far = int(np.argmax(family.space.dist[0]))
    fns = list(family.functions)
    coeffs = dict(fns[0].coeffs)
    coeffs[far] = coeffs.get(far, 0.0) + 1.0
    fns[0] = L1Function(coeffs)
    return WitnessFamily(family.space, family.cover, family.f, family.anchors, fns)


def witness_support(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Every witness function lives in the ball of radius S around its point."""
    checked, skipped, violations = [], [], []
    for inst in build_corpus(cfg.seed):
        if _has_full(inst.cover):
            skipped.append(inst.name)  # a member equal to X has infinite depth
            continue
        for f in (1.0, 4.0):
            fam = build_witness(inst.space, inst.cover, f)
            if cfg.inject == "corrupt-witness" and not checked:
                fam = _corrupt(fam)
            rep = support_radius_check(fam)
            checked.append(inst.name)
            if rep.violations:
                violations.append({"instance": inst.name, "f": f, "count": len(rep.violations), "first": rep.violations[0]})
    return not violations and bool(checked), {
        "families_checked": len(checked),
        "skipped_full_member": skipped,
        "violations": violations,
    }


def amplification(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Score at rate sqrt(f) clears the amplification bound wherever the premise holds."""
    checked, failures, premise_failed = 0, [], 0
    worst = math.inf
    for inst in build_corpus(cfg.seed):
        for f in (1.0, 4.0, 16.0):
            base = ald_score(inst.space, inst.cover, Exponential(f))
            for eps in (0.1, 0.5):
                if base < 1 + eps:
                    premise_failed += 1
                    continue
                rep = amplification_check(inst.space, inst.cover, eps, f, cfg.tol)
                checked += 1
                worst = min(worst, rep.amplified_score - rep.bound)
                if not rep.passed:
                    failures.append({"instance": inst.name, "f": f, "epsilon": eps, "a_nonempty": rep.a_nonempty,
                                     "score": rep.amplified_score, "bound": rep.bound})
    return checked > 0 and not failures, {
        "checked": checked,
        "premise_not_met": premise_failed,
        "min_slack": worst,
        "failures": failures,
    }


def dimension_to_depth(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Windows of 2k points stepping by k: multiplicity 2, Lebesgue number k,
    and depth mean under g(t) = 2t at least k/2."""
    space = path_space(200)
    ks = (2, 4, 8, 16)
    covers = {k: generate_cover(space, CoverSpec("intervals", length=2 * k - 1, overlap=k - 1)) for k in ks}
    exact = {k: lebesgue_number_exact(c) for k, c in covers.items()}
    rep = subexp_dim_to_ald_check(space, covers, lambda lam: 1, cfg.tol)
    leb_ok = all(exact[k] >= k and is_lebesgue_number(c, k) for k, c in covers.items())
    mult_ok = all(global_multiplicity(c) == 2 for c in covers.values())
    # the literal (2k, k) windows overlap three deep; record them for comparison
    literal = {}
    for k in ks:
        c = generate_cover(space, CoverSpec("intervals", length=2 * k, overlap=k))
        low = min(depth_mean(space, c, lambda t: 2 * t, x) for x in range(space.n))
        literal[k] = {"multiplicity": global_multiplicity(c), "min_depth_mean": low}
    rows = [{"k": r["k"], "lebesgue": exact[r["k"]], "multiplicity": r["multiplicity"],
             "min_depth_mean": r["min_depth_mean"], "target": r["target"], "pass": r["pass"]} for r in rep["rows"]]
    return leb_ok and mult_ok and rep["checked"] == len(ks) and rep["all_pass"], {
        "rows": rows,
        "lebesgue_ok": leb_ok,
        "multiplicity_2": mult_ok,
        "literal_2k_k_windows": literal,
    }


def ad_exact_search(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Small exact values, then the solver on the full pool against an integer program."""
    p4 = ad_estimate(path_space(4), 1, 2)
    zero = []
    for inst in build_corpus(cfg.seed)[:12]:
        est = ad_estimate(inst.space, 0, 0)
        zero.append({"instance": inst.name, "value": est.value, "exact": est.exact})
    rng = _rng(cfg, 6)
    graphs = []
    for i in range(10):
        n = int(rng.integers(4, 9))
        sp = random_graph_space(rng, n, extra=0.1)
        for lam, cap in ((1, 1), (1, 2), (2, 3), (2, 4)):
            est = ad_estimate(sp, lam, cap, pool=full_pool(sp, cap))
            dist = sp.dist.tolist()
            oracle = ref.min_multiplicity_milp(dist, lam, cap) - 1
            row = {"graph": i, "n": n, "lambda": lam, "cap": cap, "value": est.value, "exact": est.exact, "oracle": oracle}
            if n <= 4:
                row["bruteforce"] = ref.min_multiplicity_bruteforce(dist, lam, cap) - 1
            row["match"] = est.exact and est.value == oracle and row.get("bruteforce", oracle) == oracle
            graphs.append(row)
    p4_ok = p4.value == 1 and p4.exact
    zero_ok = all(z["value"] == 0 and z["exact"] for z in zero)
    graphs_ok = all(g["match"] for g in graphs)
    return p4_ok and zero_ok and graphs_ok, {
        "path4_lambda1_cap2": {"value": p4.value, "exact": p4.exact},
        "lambda0": zero,
        "random_graphs": graphs,
    }


def piecewise_g(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Strict monotonicity, the lower envelope, and decay of g/b^t past S_{k-1}."""
    rng = _rng(cfg, 7)
    rows = []
    for i in range(20):
        pieces = int(rng.integers(2, 5))
        S = np.cumsum(rng.integers(1, 6, size=pieces)).astype(float)
        c = np.sort(rng.uniform(1.05, 2.5, size=pieces))[::-1]
        g = build_g(S, c)
        bs = sorted({*(ck + 0.05 for ck in g.c), 1.5, 2.0, 3.0, 4.0})
        rep = verify_g_properties(g, bs)
        lower = all(r["pass"] for r in rep["lower_envelope"])
        decay = [r for r in rep["decay"]]
        decay_ok = all(r["from_knot"] for r in decay)
        rows.append(
            {
                "S": g.S,
                "c": g.c,
                "strictly_increasing": rep["strictly_increasing"],
                "lower_envelope": lower,
                "decay_from_knot": decay_ok,
                "decay_failures": [{"k": r["k"], "b": r["b"], "tail_start": r["tail_start"]} for r in decay if not r["from_knot"]],
                "eventually_nonincreasing": all(r["eventually_nonincreasing"] for r in decay),
                "pass": rep["strictly_increasing"] and lower and decay_ok,
            }
        )
    summary = {
        "instances": len(rows),
        "strictly_increasing": sum(r["strictly_increasing"] for r in rows),
        "lower_envelope": sum(r["lower_envelope"] for r in rows),
        "decay_from_knot": sum(r["decay_from_knot"] for r in rows),
        "eventually_nonincreasing": sum(r["eventually_nonincreasing"] for r in rows),
    }
    return all(r["pass"] for r in rows), {"summary": summary, "rows": rows}


def lebesgue_checkers(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Clique-based exact Lebesgue number against all subsets; ball bound below it."""
    rows = []
    for inst in build_corpus(cfg.seed):
        exact = lebesgue_number_exact(inst.cover)
        lb = lebesgue_ball_lower_bound(inst.cover)
        row = {"instance": inst.name, "n": inst.space.n, "exact": exact, "ball_bound": lb, "bound_ok": lb <= exact}
        if inst.space.n <= 12:
            row["bruteforce"] = ref.lebesgue_number(inst.space.dist.tolist(), inst.cover.sets)
            row["agree"] = row["bruteforce"] == exact
        rows.append(row)
    compared = [r for r in rows if "agree" in r]
    ok = bool(compared) and all(r["agree"] for r in compared) and all(r["bound_ok"] for r in rows)
    return ok, {"compared_with_bruteforce": len(compared), "rows": rows}


def _embedding_suite() -> list[tuple[str, Any, Cover]]:
    out = []
    p5, p10 = path_space(5), path_space(10)
    out.append(("double-P5-P10", embedding(p5, p10, [2 * i for i in range(5)]), Cover(p10, [range(6), range(4, 10)])))
    p20, p40 = path_space(20), path_space(40)
    out.append(("double-P20-P40", embedding(p20, p40, [2 * i for i in range(20)]),
                generate_cover(p40, CoverSpec("intervals", length=8, overlap=3))))
    p9, grid = path_space(9), grid_space(9, 5)
    out.append(("row-P9-grid9x5", embedding(p9, grid, [2 * 9 + i for i in range(9)]),
                generate_cover(grid, CoverSpec("boxes", side=3, overlap=1))))
    c12 = cycle_space(12)
    out.append(("identity-C12", embedding(c12, c12, range(12)),
                generate_cover(c12, CoverSpec("netballs", net_radius=2, ball_radius=3))))
    g = grid_space(6, 6)
    out.append(("identity-grid6x6", embedding(g, g, range(36)), generate_cover(g, CoverSpec("boxes", side=2, overlap=1))))
    small, big = tree_space(3, 2), tree_space(3, 3)
    index = {lab: i for i, lab in enumerate(big.labels)}
    out.append(("tree3-2-into-tree3-3", embedding(small, big, [index[lab] for lab in small.labels]),
                generate_cover(big, CoverSpec("netballs", net_radius=1, ball_radius=2))))
    return out


def qi_certificates(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Pullback certificates and depth transport over the embedding suite."""
    rows, tight = [], None
    for name, phi, cover in _embedding_suite():
        mod = fit_moduli(phi)
        cert = pullback_certificate(phi, mod, cover, tol=cfg.tol)
        transports = [ald_transport_check(phi, mod, cover, w, cfg.tol) for w in (Exponential(2.0), Geometric(1.5), lambda t: t + 1)]
        row = {
            "embedding": name,
            "A": mod.A,
            "C": mod.C,
            "certificate": cert["pass"],
            "violations": len(cert["multiplicity"]["violations"]) + len(cert["diameter"]["violations"])
            + len(cert["boundary"]["violations"]),
            "worst_boundary_slack": cert["boundary"]["worst_slack"],
            "transport": all(t["pass"] for t in transports),
        }
        rows.append(row)
        if name == "double-P5-P10":
            at = cert["boundary"]["worst_at"]
            tight = {"slack": cert["boundary"]["worst_slack"], "x": at["x"] if at else None}
    tight_ok = tight is not None and tight["x"] == 0 and abs(tight["slack"]) <= cfg.tol
    ok = all(r["certificate"] and r["transport"] and r["violations"] == 0 for r in rows) and tight_ok
    return ok, {"rows": rows, "doubling_tight_at_0": tight, "tight_ok": tight_ok}


def oracle_equivalence(cfg: SuiteConfig) -> tuple[bool, dict]:
    """Boundary distances, depth means and variation ratios against naive loops."""
    rng = _rng(cfg, 11)
    counts = {"boundary": 0, "depth": 0, "variation": 0}
    mismatches = []
    worst = {"depth": 0.0, "variation": 0.0}
    for i in range(100):
        n = int(rng.integers(4, 31))
        integral = i % 2 == 0
        sp = random_graph_space(rng, n, extra=0.1, max_weight=3) if integral else random_euclidean_space(rng, n)
        cover = random_cover(rng, sp)
        dist = sp.dist.tolist()
        for j, s in enumerate(cover.sets):
            for x in range(n):
                counts["boundary"] += 1
                if boundary_distance(cover, x, j) != ref.boundary_distance(dist, s, x):
                    mismatches.append({"instance": i, "kind": "boundary", "x": x, "member": j})
        # powers of two sum exactly, so integral metrics are compared bit for bit
        w = Geometric(2.0) if integral else Exponential(float(rng.uniform(1.0, 8.0)))
        for x in range(n):
            a, b = depth_mean(sp, cover, w, x), ref.depth_mean(dist, cover.sets, w, x)
            counts["depth"] += 1
            if integral and a != b or not integral and not _rel_close(a, b, 1e-12):
                mismatches.append({"instance": i, "kind": "depth", "x": x, "value": a, "reference": b})
            elif a != b:
                worst["depth"] = max(worst["depth"], abs(a - b) / max(abs(a), abs(b)))
        if _has_full(cover):
            continue
        f = float(rng.uniform(1.0, 8.0))
        fam = build_witness(sp, cover, f)
        for R in (1.0, 2.5, 4.0):
            a = variation_ratio(fam, R)
            b = ref.variation_ratio(dist, cover.sets, f, fam.anchors, R)
            counts["variation"] += 1
            if not _rel_close(a, b, 1e-12):
                mismatches.append({"instance": i, "kind": "variation", "R": R, "value": a, "reference": b})
            elif a != b:
                worst["variation"] = max(worst["variation"], abs(a - b) / max(abs(a), abs(b)))
    return not mismatches, {"comparisons": counts, "max_relative_error": worst, "mismatches": mismatches[:20]}


@dataclass(frozen=True)
class Criterion:
    id: int
    name: str
    tags: tuple[str, ...]
    run: Callable[[SuiteConfig], tuple[bool, dict]]


CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, "rate-representation", ("depth",), rate_representation),
    Criterion(2, "witness-variation-bound", ("witness",), witness_variation),
    Criterion(3, "witness-support", ("witness",), witness_support),
    Criterion(4, "amplification", ("depth",), amplification),
    Criterion(5, "dimension-to-depth", ("asdim",), dimension_to_depth),
    Criterion(6, "ad-exact-search", ("asdim",), ad_exact_search),
    Criterion(7, "piecewise-g-construction", ("subexp",), piecewise_g),
    Criterion(8, "lebesgue-checkers", ("covers",), lebesgue_checkers),
    Criterion(9, "qi-certificates", ("qi",), qi_certificates),
    Criterion(10, "determinism", ("determinism",), lambda cfg: (True, {})),  # handled in run_suite
    Criterion(11, "oracle-equivalence", ("oracle",), oracle_equivalence),
)


def select(filter_text: str | None) -> list[Criterion]:
    """Criteria whose id, name or tag matches any comma-separated term."""
    if not filter_text:
        return list(CRITERIA)
    terms = [t.strip() for t in filter_text.split(",") if t.strip()]
    out = [c for c in CRITERIA if any(t == str(c.id) or t in c.tags or t in c.name for t in terms)]
    if not out:
        raise ValueError(f"filter {filter_text!r} matches no checks")
    return out


def _row(c: Criterion, cfg: SuiteConfig) -> dict[str, Any]:
    ok, details = c.run(cfg)
    return {"id": c.id, "name": c.name, "tags": list(c.tags), "pass": bool(ok), "details": details}


def _run_rows(crits: list[Criterion], cfg: SuiteConfig, threads: int) -> list[dict[str, Any]]:
    if threads <= 1:
        return [_row(c, cfg) for c in crits]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: _row(c, cfg), crits))


def run_suite(cfg: SuiteConfig, threads: int | None = None) -> dict[str, Any]:
    threads = threads_from_env() if threads is None else threads
    crits = select(cfg.filter)
    body = [c for c in crits if c.id != 10]
    rows = _run_rows(body, cfg, threads)
    if any(c.id == 10 for c in crits):
        # compare against a rerun at the other end of {1, 8} threads
        other = 8 if threads == 1 else 1
        first = dumps(rows)
        second = dumps(_run_rows(body, cfg, other))
        rows.append({
            "id": 10,
            "name": "determinism",
            "tags": ["determinism"],
            "pass": first == second,
            "details": {"thread_counts": sorted({threads, other}), "rows_compared": len(body),
                        "identical": first == second},
        })
        rows.sort(key=lambda r: r["id"])
    config = {"command": "verify-suite", **asdict(cfg)}
    failed = [r["name"] for r in rows if not r["pass"]]
    return {
        "config": config,
        "input_hash": content_hash((), config),
        "rows": rows,
        "summary": {"rows": len(rows), "passed": len(rows) - len(failed), "failed": failed, "all_pass": not failed},
    }
