"""Command-line entry point: ``gfekit <command> [options]``.

Every command prints a JSON report (see ``schemas/report.schema.json``) and
exits 0 when all checks pass, 1 when a check fails and 2 on usage or domain
errors.
"""
from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import replace as dc_replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import mpmath
import numpy as np

from . import catalog
from .catalog import CatalogError, SolutionRecord
from .expr import as_expr, parse
from .expr.errors import DomainError, SamplingError
from .expr.nodes import free_symbols
from .expr.numeric import DEFAULT_SEED, Box, equals_zero, sample_points
from .foliation import (
    FoliationError,
    LambdaOutOfRange,
    ReconstructConfig,
    automorphic_residuals,
    closed_form_root,
    compare_with,
    default_branch,
    equivalence_check,
    example1_quadruple,
    example1_radicand,
    example2_parametric,
    example2_tilde,
    example3_pair_from_Q,
    example3_residuals,
    lambda_of_S,
    quartic_coefficients,
    reconstruct_quadruple,
    resolving_residuals,
    rossby_window,
    solve_S_for_lambda,
    write_table,
)
from .report import Check, Report, threshold_check, verdict_from_status
from .simulator import PeriodicityError, RunConfig, SimulationError, run

USAGE_ERRORS = (CatalogError, FoliationError, DomainError, SamplingError, PeriodicityError, LambdaOutOfRange, ValueError)


class UsageError(Exception):
    pass


# -- argument handling ---------------------------------------------------


def _params(items: Optional[Sequence[str]]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def read_config(path: str) -> Dict[str, object]:
    """``key = value`` lines; ``param.<name> = value`` sets a solution parameter."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        cp.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"bad config {path}: {exc}") from None
    out: Dict[str, object] = {"param": {}}
    for k, v in cp["config"].items():
        key = k.strip().replace("-", "_")
        if key.startswith("param."):
            out["param"][key[6:]] = v  # type: ignore[index]
        else:
            out[key] = v
    return out


def _merge_config(args: argparse.Namespace, parser_defaults: Dict[str, object]):
    params = {}
    if args.config:
        cfg = read_config(args.config)
        params.update(cfg.pop("param"))
        for key, value in cfg.items():
            if not hasattr(args, key):
                raise UsageError(f"unknown config key {key!r}")
            if getattr(args, key) == parser_defaults.get(key):
                default = parser_defaults.get(key)
                setattr(args, key, type(default)(value) if isinstance(default, (int, float)) and default is not None else value)
    params.update(_params(getattr(args, "param", None)))
    args.params = params


def _num(v, name: str):
    try:
        e = parse(str(v))
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from None
    return e


# -- verify-solution -----------------------------------------------------


def _record(name: str, params: Dict[str, str], beta) -> SolutionRecord:
    builder_params = dict(params)
    takes_beta = name in ("polynomial", "harmonic", "rossby")
    if beta is not None and takes_beta:
        builder_params["beta"] = beta
    rec = catalog.get(name, **builder_params)
    if beta is not None and not takes_beta:
        rec = dc_replace(rec, beta=_num(beta, "beta"))
    return rec


def cmd_verify_solution(args, report: Report):
    rec = _record(args.name, args.params, args.beta)
    box = rec.numeric_box(Box.parse(args.box) if args.box else None)
    for p in sample_points(box, 16, args.seed):
        if not rec.is_valid_at({k: p.get(k, 0.0) for k in ("t", "x", "y")}):
            raise UsageError(f"box leaves the validity domain of {rec.key}: {rec.domain_note}")
    report.parameters.update({"record": rec.to_json(), "box": args.box, "mode": args.mode, "points": args.points})
    with report.timed() as slot:
        v = equals_zero(rec.residual(), args.mode, box, n=args.points, seed=args.seed)
        slot["checks"].append(Check("gfe_residual", verdict_from_status(v.status), v.tolerance, v.max_residual, v.witness,
                                    detail={"status": v.status, "points": v.points, "precision": v.precision,
                                            "domain_failures": v.domain_failures}))
    if rec.periodicity is not None:
        with report.timed() as slot:
            ok = rec.check_periodicity(seed=args.seed)
            slot["checks"].append(Check("periodicity", "probable" if ok else "failed", 1e-12, None,
                                        None if ok else {"periodicity": list(rec.periodicity)}))


# -- verify-foliation ----------------------------------------------------


def _samples_check(name: str, samples, tol: float, **detail) -> Check:
    if not samples.values:
        return Check(name, "failed", tol, None, {"reason": "no valid sample points", "skipped": samples.skipped[:3]})
    return threshold_check(name, samples.max_abs, tol, samples.worst(), points=len(samples.values),
                           skipped=len(samples.skipped), flagged=len(samples.flagged), **detail)


def _example1(args, report: Report):
    p = args.params
    c1, c2 = _num(p.get("c1", 1), "c1"), _num(p.get("c2", 0), "c2")
    beta = _num(args.beta if args.beta is not None else 1, "beta")
    report.parameters.update({"c1": str(c1), "c2": str(c2), "beta": str(beta)})
    with report.timed() as slot:
        q = example1_quadruple(c1, c2, beta)
        slot["checks"].append(Check("constructor", "proved", detail={"label": q.label, "tag": q.tag}))
    with report.timed() as slot:
        res = resolving_residuals(q, beta)
        for i, r in enumerate(res, start=1):
            box = Box.parse("t=0:1,y=0.5:2,h=-1:1", [example1_radicand(c1, c2, beta)])
            v = equals_zero(r, "auto", box, seed=args.seed)
            slot["checks"].append(Check(f"resolving.R{i}", verdict_from_status(v.status), v.tolerance, v.max_residual, v.witness))
    rec = catalog.polynomial_solution(c1, c2, beta)
    branch = default_branch(rec)
    with report.timed() as slot:
        auto = automorphic_residuals(rec.expr, q)
        box = Box(rec.domain.intervals, (branch,))
        for name, e in zip("UVWZ", auto):
            v = equals_zero(e, "numeric", box, n=64, seed=args.seed, tol=1e-25)
            slot["checks"].append(Check(f"automorphic.{name}", verdict_from_status(v.status), v.tolerance, v.max_residual,
                                        v.witness, detail={"branch": f"{branch} > 0"}))
    with report.timed() as slot:
        rc = reconstruct_quadruple(rec, ReconstructConfig(samples=args.samples, seed=args.seed))
        slot["checks"].append(_well_defined(rc))
        worst, where = compare_with(rc, lambda t, y, h: q.evaluate(t, y, h))
        slot["checks"].append(threshold_check("route_consistency", worst, 1e-8, where))


def _example2(args, report: Report):
    beta = float(args.beta if args.beta is not None else 1)
    if beta == 0:
        raise UsageError("beta must be non-zero")
    report.parameters.update({"beta": beta})
    with report.timed() as slot:
        example2_tilde("derived", as_expr(beta))
        slot["checks"].append(Check("r_cancellation", "proved", detail={"form": "derived"}))
        q = example2_parametric(as_expr(beta))
        slot["checks"].append(Check("lambda_monotone", "proved", detail={"interval": list(q.interval)}))
    with report.timed() as slot:
        slot["checks"].append(_samples_check("resolving", resolving_residuals(q, beta), 1e-8))
    rec = catalog.harmonic_solution(as_expr(beta))
    with report.timed() as slot:
        auto = automorphic_residuals(rec.expr, q, box=rec.domain, n=64, seed=args.seed,
                                     solve=lambda lam: solve_S_for_lambda(lam, beta, "derived"))
        slot["checks"].append(_samples_check("automorphic", auto, 1e-8))
    with report.timed() as slot:
        for form in ("printed", "derived"):
            worst = 0.0
            where = None
            for S in _quartic_samples(args.seed):
                lam = lambda_of_S(S, beta, form)
                r = quartic_coefficients(lam, beta, form).relative_residual(mpmath.mpf(S) ** 2)
                if float(r) > worst:
                    worst, where = float(r), {"S": S}
            slot["checks"].append(threshold_check(f"quartic_consistency.{form}", worst, 1e-10, where))
        worst, where = 0.0, None
        for S in _quartic_samples(args.seed):
            s = solve_S_for_lambda(lambda_of_S(S, beta, "derived"), beta, "derived")
            d = abs(float(s) - S)
            if d > worst:
                worst, where = d, {"S": S, "recovered": float(s)}
        slot["checks"].append(threshold_check("quartic_roundtrip", worst, 1e-10, where, form="derived"))
    if beta > 0:
        for lam in (0.05, 0.1, 0.2):
            for br in ("real", "complex"):
                report.observe(f"closed_form_root(lambda={lam},branch={br})", closed_form_root(lam, beta, br).summary())
    with report.timed() as slot:
        rc = reconstruct_quadruple(rec, ReconstructConfig(samples=args.samples, seed=args.seed))
        slot["checks"].append(_well_defined(rc))
        worst, where = compare_with(rc, lambda t, y, h: q.evaluate_at(t, y, h, lambda lam: solve_S_for_lambda(lam, beta)))
        slot["checks"].append(threshold_check("route_consistency", worst, 1e-6, where))


def _quartic_samples(seed: int, n: int = 20) -> List[float]:
    rng = np.random.default_rng([seed, 5])
    out = []
    while len(out) < n:
        s = float(rng.uniform(-0.49, 0.49))
        if abs(s) > 1e-3:
            out.append(s)
    return out


def _example3(args, report: Report):
    p = args.params
    A, k = p.get("A", "1"), p.get("k", "1")
    beta = args.beta if args.beta is not None else "1"
    rec = catalog.get("rossby", A=A, k=k, beta=beta)
    report.parameters.update({"A": A, "k": k, "beta": str(beta), "window": "phase in (0.5, pi - 0.5)"})
    with report.timed() as slot:
        pair = example3_pair_from_Q(rec)
        slot["checks"].append(Check("monotone_window", "proved", detail=pair.window))
        slot["checks"].append(_samples_check("reduced_resolving", example3_residuals(pair, rec.beta), 1e-10))
    with report.timed() as slot:
        _, _, H2, worst = equivalence_check(rec)
        slot["checks"].append(threshold_check("xinf_equivalence", worst, 1e-10, None, transformed=str(H2), q="sin(t)"))
        box = rossby_window(rec).shifted(parse("-cos(t)")).box()
        auto = automorphic_residuals(H2, pair, box=box, n=16, seed=args.seed)
        slot["checks"].append(_samples_check("automorphic_transformed", auto, 1e-10))


def _well_defined(rc) -> Check:
    if rc.well_defined:
        return Check("well_defined", "probable", None, None, None,
                     detail={"sample_pairs": rc.sample_pairs, "partners": rc.partners, "verdict": rc.verdict})
    c = rc.collisions[0]
    return Check("well_defined", "failed", None, c.gap, c.to_json(),
                 detail={"collisions": len(rc.collisions), "verdict": rc.verdict})


def cmd_verify_foliation(args, report: Report):
    report.parameters.update({"example": args.example, "params": dict(args.params)})
    {1: _example1, 2: _example2, 3: _example3}[args.example](args, report)


# -- reconstruct ---------------------------------------------------------


def cmd_reconstruct(args, report: Report):
    rec = _record(args.name, args.params, args.beta)
    if free_symbols(rec.expr) - {"t", "x", "y", "pi"}:
        raise UsageError(f"bind every parameter of {rec.key} (free: {sorted(free_symbols(rec.expr) - {'t', 'x', 'y', 'pi'})})")
    box = Box.parse(args.box) if args.box else None
    report.parameters.update({"record": rec.to_json(), "samples": args.samples, "box": args.box, "out": args.out})
    with report.timed() as slot:
        rc = reconstruct_quadruple(rec, ReconstructConfig(samples=args.samples, seed=args.seed, box=box))
        slot["checks"].append(_well_defined(rc))
    if args.out:
        write_table(rc.quadruple, args.out)
        report.outputs.append(str(args.out))


# -- simulate ------------------------------------------------------------


def cmd_simulate(args, report: Report):
    rec = _record(args.solution, args.params, args.beta)
    cfg = RunConfig(rec, N=args.N, dt=args.dt, T=args.T, output_every=args.output_every,
                    beta=None if args.beta is None else float(args.beta))
    report.parameters.update({"record": rec.to_json(), "N": args.N, "dt": args.dt, "T": args.T, "out": args.out})
    with report.timed() as slot:
        res = run(cfg)
        slot["checks"].append(threshold_check("final_linf_error", res.final_linf, args.linf_tol, {"time": res.times[-1]},
                                              l2=res.final_l2, steps=res.steps, dt=res.dt))
        slot["checks"].append(threshold_check("enstrophy_drift", res.relative_drift("enstrophy"), 1e-8))
        slot["checks"].append(threshold_check("energy_drift", res.relative_drift("energy"), 1e-8))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report.outputs.append(str(res.write_csv(out / "timeseries.csv")))


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gfekit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--param", action="append", metavar="K=V", help="solution or example parameter (repeatable)")
        sp.add_argument("--beta", default=None, help="beta (numeric)")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"sampling seed (default {DEFAULT_SEED})")
        sp.add_argument("--config", default=None, help="key = value file; flags override it")
        sp.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
        sp.add_argument("--timings", action="store_true", help="record wall times (makes reports non-reproducible)")

    s = sub.add_parser("verify-solution", help="check a catalog solution against the GFE")
    s.add_argument("--name", required=False, default=None)
    s.add_argument("--mode", choices=("symbolic", "numeric", "auto"), default="auto")
    s.add_argument("--box", default=None, help="sampling box, e.g. x=0.5:2,y=-0.4*x:0.4*x")
    s.add_argument("--points", type=int, default=64)
    common(s)

    s = sub.add_parser("verify-foliation", help="certificate chain of a worked example")
    s.add_argument("--example", type=int, choices=(1, 2, 3), default=None)
    s.add_argument("--samples", type=int, default=64, help="reconstruction samples")
    common(s)

    s = sub.add_parser("reconstruct", help="tabulate a quadruple from a solution")
    s.add_argument("--name", default=None)
    s.add_argument("--samples", type=int, default=64)
    s.add_argument("--box", default=None)
    s.add_argument("--out", default=None, help="table path (columnar text)")
    common(s)

    s = sub.add_parser("simulate", help="pseudo-spectral run against a periodic solution")
    s.add_argument("--solution", default=None)
    s.add_argument("--N", type=int, default=64)
    s.add_argument("--T", type=float, default=2 * math.pi)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--output-every", dest="output_every", type=int, default=100)
    s.add_argument("--linf-tol", dest="linf_tol", type=float, default=1e-6)
    s.add_argument("--out", default=None, help="directory for timeseries.csv")
    common(s)
    return p


_COMMANDS = {
    "verify-solution": (cmd_verify_solution, "name"),
    "verify-foliation": (cmd_verify_foliation, "example"),
    "reconstruct": (cmd_reconstruct, "name"),
    "simulate": (cmd_simulate, "solution"),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]  # type: ignore[union-attr]
    defaults = {a.dest: a.default for a in sub._actions}
    fn, required = _COMMANDS[args.command]
    try:
        _merge_config(args, defaults)
        if args.command == "verify-foliation" and args.example is not None:
            args.example = int(args.example)
        if getattr(args, required) is None:
            raise UsageError(f"--{required} is required")
        report = Report(args.command, {}, args.seed, timings=args.timings)
        fn(args, report)
    except (UsageError, *USAGE_ERRORS, SimulationError) as exc:
        print(f"gfekit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = report.dumps()
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} [{c.verdict}]", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
