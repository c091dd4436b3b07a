"""Command-line front end.

Exit codes: 0 when every check in the run passed, 2 when a check failed,
1 on input or usage errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Sequence

from aldkit.asdim import ad_estimate, default_cap_rule, full_pool, growth_curve
from aldkit.covers import load_cover, save_cover
from aldkit.depth import TOL, Exponential, RateSequence, ald_profile_rows, check_ald_condition, parse_weight
from aldkit.errors import AldkitError, ThresholdNotFound
from aldkit.generators import CoverSpec, SpaceSpec, generate_cover, generate_space
from aldkit.qi import (
    ald_transport_check,
    fit_moduli,
    load_map,
    pullback_certificate,
    qi_embedding_check,
    qi_pair_report,
)
from aldkit.reporting import content_hash, csv_text, dumps, write_text
from aldkit.space import load_space
from aldkit.subexp import build_g, halving_rescale, load_g, thresholds_from_g, verify_g_properties
from aldkit.suite import INJECTIONS, SuiteConfig, run_suite
from aldkit.witness import build_witness, property_a_report, save_witness

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors are input errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _config(args: argparse.Namespace) -> dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _envelope(args: argparse.Namespace, inputs: Sequence[str], body: dict[str, Any]) -> dict[str, Any]:
    config = _config(args)
    return {"config": config, "input_hash": content_hash(inputs, config), **body}


# --- subcommands --------------------------------------------------------------


def cmd_gen_space(args: argparse.Namespace) -> int:
    spec = SpaceSpec(args.kind, args.n, args.width, args.height, args.valence, args.radius)
    space = generate_space(spec, args.size_cap)
    write_text(dumps(space.to_json()), args.out)
    return EXIT_OK


def cmd_gen_cover(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    spec = CoverSpec(args.kind, args.length, args.overlap, args.side, args.net_radius, args.ball_radius, args.seed)
    cover = generate_cover(space, spec)
    write_text(dumps(cover.to_json(args.space)), args.out)
    return EXIT_OK


def cmd_depth_report(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    weight = parse_weight(args.weight)
    covers = [load_cover(p, space) for p in args.cover]
    seq = RateSequence({k: (c, weight) for k, c in enumerate(covers, start=1)})
    rep = check_ald_condition(space, seq, args.epsilon, tol=args.tol)
    if len(rep["rows"]) == 1:
        rep.update({k: rep["rows"][0][k] for k in ("score", "log_score", "argmin_point", "pass")})
    write_text(dumps(_envelope(args, [args.space, *args.cover], {"weight": args.weight, **rep})), args.out)
    if args.csv:
        write_text(csv_text(("k", "x", "depth_mean"), ald_profile_rows(space, seq)), args.csv)
    return EXIT_OK if rep["all_pass"] else EXIT_CHECK


def cmd_witness_report(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    covers = [load_cover(p, space) for p in args.cover]
    fs = args.f if len(args.f) == len(covers) else args.f * len(covers) if len(args.f) == 1 else None
    if fs is None:
        raise ValueError("give one --f value, or one per cover")
    seq = RateSequence({k: (c, Exponential(f)) for k, (c, f) in enumerate(zip(covers, fs), start=1)})
    rep = property_a_report(space, seq, args.epsilon, args.R, args.anchor, args.tol)
    rows = [(r["k"], r["R"], r["measured"], r["bound"], r["pass"]) for r in rep["rows"]]
    write_text(csv_text(("k", "R", "measured", "bound", "pass"), rows), args.out)
    if args.json:
        write_text(dumps(_envelope(args, [args.space, *args.cover], rep)), args.json)
    if args.dump:
        save_witness(build_witness(space, covers[0], fs[0], args.anchor, args.seed), args.dump)
    hypothesis = all(r["hypothesis"] for r in rep["rows"])
    if not hypothesis:
        print("warning: some covers miss the 1+epsilon score premise", file=sys.stderr)
    return EXIT_OK if rep["all_pass"] and hypothesis else EXIT_CHECK


def cmd_asdim_estimate(args: argparse.Namespace) -> int:
    space = load_space(args.space)
    lams = args.lambdas
    if args.pool == "full":
        cap_rule = (lambda lam: args.cap) if args.cap is not None else default_cap_rule
        ests = [ad_estimate(space, lam, cap_rule(lam), args.budget, full_pool(space, cap_rule(lam))) for lam in lams]
    elif len(lams) == 1:
        cap = args.cap if args.cap is not None else default_cap_rule(lams[0])
        ests = [ad_estimate(space, lams[0], cap, args.budget)]
    else:
        ests = growth_curve(space, lams, (lambda lam: args.cap) if args.cap is not None else default_cap_rule, args.budget)
    rows = [(e.lam, e.diameter_cap, e.value, e.exact) for e in ests]
    write_text(csv_text(("lambda", "cap", "value", "exact"), rows), args.out)
    if args.cover_out:
        save_cover(ests[-1].cover, args.cover_out, args.space)
    return EXIT_OK


def cmd_subexp_build(args: argparse.Namespace) -> int:
    g = build_g(args.S, args.c)
    rep = verify_g_properties(g, args.b or [])
    write_text(dumps(g.to_json()), args.out)
    ok = rep["strictly_increasing"] and all(r["pass"] for r in rep["lower_envelope"])
    ok = ok and all(r["from_knot"] for r in rep["decay"])
    if args.report:
        write_text(dumps(_envelope(args, [], {"g": g.to_json(), "pass": ok, **rep})), args.report)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_subexp_thresholds(args: argparse.Namespace) -> int:
    g = load_g(args.g)
    inputs = [args.g]
    try:
        table = thresholds_from_g(g, args.kmax, args.search_cap, args.step)
    except ThresholdNotFound as exc:
        write_text(dumps(_envelope(args, inputs, {"error": str(exc), "pass": False})), args.out)
        return EXIT_CHECK
    body: dict[str, Any] = {"T": table.T, "search_cap": table.search_cap, "step": table.step}
    ok = True
    if args.space:
        space = load_space(args.space)
        covers = [load_cover(p, space) for p in args.cover]
        if len(covers) > args.kmax:
            raise ValueError("more covers than --kmax thresholds")
        w = g.as_weight() if hasattr(g, "as_weight") else g
        seq = RateSequence({k: (c, w) for k, c in enumerate(covers, start=1)})
        rescale = halving_rescale(space, seq, table, args.tol)
        body["rescale"] = {k: v for k, v in rescale.items() if k != "sequence"}
        ok = rescale["all_pass"]
        inputs += [args.space, *args.cover]
    body["pass"] = ok
    write_text(dumps(_envelope(args, inputs, body)), args.out)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_qi_check(args: argparse.Namespace) -> int:
    dom, cod = load_space(args.domain), load_space(args.codomain)
    phi = load_map(args.map, dom, cod)
    inputs = [args.domain, args.codomain, args.map]
    mod = fit_moduli(phi)
    body: dict[str, Any] = {"moduli": {"A": mod.A, "C": mod.C, "S": mod.S_table, "rho": mod.rho_table}}
    checks = []
    if args.A is not None or args.C is not None:
        A = args.A if args.A is not None else mod.A
        C = args.C if args.C is not None else mod.C
        if args.inverse:
            psi = load_map(args.inverse, cod, dom)
            inputs.append(args.inverse)
            body["qi_pair"] = qi_pair_report(phi, psi, A, C)
            checks += [body["qi_pair"]["forward"]["pass"], body["qi_pair"]["backward"]["pass"]]
        else:
            body["embedding"] = qi_embedding_check(phi, A, C, args.tol)
            checks.append(body["embedding"]["pass"])
    if args.cover:
        cover = load_cover(args.cover, cod)
        inputs.append(args.cover)
        body["certificate"] = pullback_certificate(phi, mod, cover, tol=args.tol)
        checks.append(body["certificate"]["pass"])
        if args.weight:
            body["transport"] = ald_transport_check(phi, mod, cover, parse_weight(args.weight), args.tol)
            checks.append(body["transport"]["pass"])
    body["pass"] = all(checks)
    write_text(dumps(_envelope(args, inputs, body)), args.out)
    return EXIT_OK if body["pass"] else EXIT_CHECK


def cmd_verify_suite(args: argparse.Namespace) -> int:
    cfg = SuiteConfig(filter=args.filter, inject=args.inject, tol=args.tol, seed=args.seed)
    report = run_suite(cfg)
    write_text(dumps(report), args.out)
    for row in report["rows"]:
        print(f"[{'PASS' if row['pass'] else 'FAIL'}] {row['id']:>2} {row['name']}", file=sys.stderr)
    return EXIT_OK if report["summary"]["all_pass"] else EXIT_CHECK


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aldkit", description="Depth, witness and dimension checks on finite metric spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, func, help_text: str, tol: bool = False) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("-o", "--out", default=None, help="output path (default: stdout)")
        if tol:
            sp.add_argument("--tol", type=_positive, default=TOL, help="absolute tolerance on inequality checks")
        return sp

    sp = add("gen-space", cmd_gen_space, "Write a generated space as JSON.")
    sp.add_argument("--kind", required=True, choices=("path", "cycle", "grid", "tree", "lamplighter"))
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--width", type=int, default=0)
    sp.add_argument("--height", type=int, default=0)
    sp.add_argument("--valence", type=int, default=0)
    sp.add_argument("--radius", type=int, default=0)
    sp.add_argument("--size-cap", type=int, default=5000)

    sp = add("gen-cover", cmd_gen_cover, "Write a generated cover of a space as JSON.")
    sp.add_argument("--space", required=True)
    sp.add_argument("--kind", required=True, choices=("intervals", "boxes", "netballs"))
    sp.add_argument("--length", type=int, default=0)
    sp.add_argument("--overlap", type=int, default=0)
    sp.add_argument("--side", type=int, default=0)
    sp.add_argument("--net-radius", type=float, default=0.0)
    sp.add_argument("--ball-radius", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("depth-report", cmd_depth_report, "Score covers against 1 + epsilon.", tol=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--cover", required=True, action="append", help="repeat for a sequence k = 1, 2, ...")
    sp.add_argument("--weight", required=True, help="exponential:F, geometric:C or linear:A")
    sp.add_argument("--epsilon", type=_positive, required=True)
    sp.add_argument("--csv", default=None, help="per-point depth means as CSV")

    sp = add("witness-report", cmd_witness_report, "Variation ratios of witness functions against their bound (CSV).", tol=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--cover", required=True, action="append")
    sp.add_argument("--f", type=_floats, required=True, help="rate f, or one per cover")
    sp.add_argument("--R", type=_floats, required=True, help="comma-separated radii")
    sp.add_argument("--epsilon", type=_positive, required=True)
    sp.add_argument("--anchor", choices=("min", "deepest", "random"), default="min")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", default=None, help="full JSON report")
    sp.add_argument("--dump", default=None, help="witness family of the first cover as JSON")

    sp = add("asdim-estimate", cmd_asdim_estimate, "Minimum-multiplicity covers with Lebesgue number >= lambda (CSV).")
    sp.add_argument("--space", required=True)
    sp.add_argument("--lambda", dest="lambdas", type=_floats, required=True, help="one or more lambdas")
    sp.add_argument("--cap", type=float, default=None, help="diameter cap (default 2*lambda+2)")
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--pool", choices=("default", "full"), default="default")
    sp.add_argument("--cover-out", default=None, help="write the cover found for the last lambda")

    sp = add("subexp-build", cmd_subexp_build, "Build the piecewise g from (S, c) and write it as JSON.")
    sp.add_argument("--S", type=_floats, required=True)
    sp.add_argument("--c", type=_floats, required=True)
    sp.add_argument("--b", type=_floats, default=None, help="bases for the decay check")
    sp.add_argument("--report", default=None, help="verification report as JSON")

    sp = add("subexp-thresholds", cmd_subexp_thresholds, "Thresholds T_k for a g, optionally rescaling covers.", tol=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--search-cap", type=float, required=True)
    sp.add_argument("--step", type=_positive, default=0.25)
    sp.add_argument("--space", default=None)
    sp.add_argument("--cover", action="append", default=[])

    sp = add("qi-check", cmd_qi_check, "Moduli, embedding and pullback checks for a map between spaces.", tol=True)
    sp.add_argument("--domain", required=True)
    sp.add_argument("--codomain", required=True)
    sp.add_argument("--map", required=True)
    sp.add_argument("--A", type=float, default=None)
    sp.add_argument("--C", type=float, default=None)
    sp.add_argument("--inverse", default=None, help="map back, for the quasi-isometry pair report")
    sp.add_argument("--cover", default=None, help="cover of the codomain to pull back")
    sp.add_argument("--weight", default=None, help="codomain weight for the transport check")

    sp = add("verify-suite", cmd_verify_suite, "Run every acceptance check; one row per check.", tol=True)
    sp.add_argument("--filter", default=None, help="comma-separated ids, names or tags")
    sp.add_argument("--inject", choices=INJECTIONS, default=None, help="negative control")
    sp.add_argument("--seed", type=int, default=0)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (AldkitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
