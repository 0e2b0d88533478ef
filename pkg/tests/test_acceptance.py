"""Acceptance criteria 1-10, each at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py -s`` to see one
PASS/FAIL line per criterion (they are also listed in the terminal summary).
"""
import math
import time

import mpmath
import pytest

from _oracles import invariant_mismatch, quartic_samples
from gfekit import catalog
from gfekit.expr import Const, as_expr
from gfekit.expr.nodes import free_symbols
from gfekit.expr.numeric import PROBABLY_ZERO, PROVED_ZERO, Box, equals_zero
from gfekit.foliation import (
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
    solve_S_for_lambda,
)
from gfekit.foliation.examples import PRINTED_MONOTONE_EDGE
from gfekit.model import gfe_residual
from gfekit.simulator import RunConfig, fd_residual_grid, run, stationarity_drift, temporal_convergence

ONE = as_expr(1)


@pytest.mark.criterion(1)
def test_symbolic_proof(criterion):
    start = time.perf_counter()
    res = gfe_residual(catalog.polynomial_solution().expr)
    elapsed = time.perf_counter() - start
    criterion.check("residual literal zero", res == Const(0), str(res))
    criterion.check("seconds", elapsed < 5, elapsed)
    assert criterion.ok


@pytest.mark.criterion(2)
def test_numeric_certificate(criterion):
    start = time.perf_counter()
    box = Box.parse("t=0:1,x=0.5:2,y=-0.4*x:0.4*x")
    for variant in ("base", "plus", "minus"):
        rec = catalog.harmonic_solution(variant=variant)
        v = equals_zero(rec.residual(), "numeric", rec.numeric_box(box), n=64, tol=1e-25)
        criterion.check(variant, v.status == PROBABLY_ZERO and v.max_residual <= 1e-25 and v.points == 64, v.max_residual)
    elapsed = time.perf_counter() - start
    criterion.check("seconds", elapsed < 10, elapsed)
    assert criterion.ok


@pytest.mark.criterion(3)
def test_example1_closure(criterion):
    for c1, c2, beta in [(1, 1, 1), (2, -1, 3)]:
        q = example1_quadruple(c1, c2, beta)
        box = Box.parse("t=0:1,y=0.5:2,h=-1:1", [example1_radicand(c1, c2, beta)])
        statuses = []
        worst = 0.0
        for r in resolving_residuals(q, beta):
            v = equals_zero(r, "auto", box, n=64)
            statuses.append(v.status)
            worst = max(worst, v.max_residual)
        ok = all(s == PROVED_ZERO or (s == PROBABLY_ZERO and worst <= 1e-10) for s in statuses)
        criterion.check(f"resolving({c1},{c2},{beta}) {'/'.join(sorted(set(statuses)))}", ok, worst)
        rec = catalog.polynomial_solution(c1, c2, beta)
        branch_box = Box(rec.domain.intervals, (default_branch(rec),))
        worst = 0.0
        ok = True
        for e in automorphic_residuals(rec.expr, q):
            v = equals_zero(e, "numeric", branch_box, n=64)
            ok &= v.status == PROBABLY_ZERO
            worst = max(worst, v.max_residual)
        criterion.check(f"automorphic({c1},{c2},{beta})", ok and worst <= 1e-10, worst)
    assert criterion.ok


@pytest.mark.criterion(4)
def test_example2_closure(criterion):
    tilde = example2_tilde("derived", ONE)
    criterion.check("r cancels", all("r" not in free_symbols(e) for e in tilde))
    q = example2_parametric(ONE)
    rec = catalog.harmonic_solution(ONE)
    auto = automorphic_residuals(rec.expr, q, box=rec.domain, n=64, solve=lambda lam: solve_S_for_lambda(lam, 1))
    criterion.check("automorphic", len(auto.values) == 64 and auto.max_abs <= 1e-8, auto.max_abs)
    res = resolving_residuals(q, 1, points=(-0.45, -0.3, -0.1, 0.1, 0.3, 0.45))
    criterion.check("resolving", res.max_abs <= 1e-8, res.max_abs)
    assert criterion.ok


@pytest.mark.criterion(5)
def test_quartic_consistency(criterion):
    samples = quartic_samples()
    assert len(samples) == 20
    for form in ("printed", "derived"):
        worst = max(float(quartic_coefficients(lambda_of_S(s, 1, form), 1, form).relative_residual(mpmath.mpf(s) ** 2))
                    for s in samples)
        criterion.check(f"polynomial[{form}]", worst <= 1e-10, worst)
    worst = max(abs(float(solve_S_for_lambda(lambda_of_S(s, 1), 1)) - s) for s in samples)
    criterion.check("roundtrip[derived]", worst <= 1e-10, worst)
    inside = [s for s in samples if abs(s) < PRINTED_MONOTONE_EDGE]
    worst = max(abs(float(solve_S_for_lambda(lambda_of_S(s, 1, "printed"), 1, "printed")) - s) for s in inside)
    criterion.check(f"roundtrip[printed, {len(inside)} in monotone range]", worst <= 1e-10, worst)
    for lam in (0.05, 0.1, 0.2):
        for branch in ("real", "complex"):
            out = closed_form_root(lam, 1, branch)
            reported = (out.value is not None) != (out.error is not None)
            tag = f"closed_form({lam},{branch})"
            if out.value is None:
                criterion.check(f"{tag} error in {out.error_helper}", reported)
            else:
                criterion.check(f"{tag} quartic_root={out.matches_root} physical={out.matches_physical}", reported)
    assert criterion.ok


@pytest.mark.criterion(6)
def test_example3(criterion):
    rec = catalog.get("rossby", A=1, k=1, beta=1)
    res = example3_residuals(example3_pair_from_Q(rec), 1)
    criterion.check("reduced system", res.max_abs <= 1e-10 and not res.skipped, res.max_abs)
    _, _, _, worst = equivalence_check(rec, "sin(t)")
    criterion.check("equivalence", worst <= 1e-10, worst)
    assert criterion.ok


@pytest.mark.criterion(7)
def test_invariant_invariance(criterion):
    for rec in catalog.list_records(verify=False):
        worst = invariant_mismatch(rec, n=32)
        criterion.check(rec.key, worst <= 1e-10, worst)
    assert criterion.ok


@pytest.mark.criterion(8)
def test_route_consistency(criterion):
    rc = reconstruct_quadruple(catalog.polynomial_solution(1, 1, 1), ReconstructConfig(samples=64))
    q1 = example1_quadruple(1, 1, 1)
    worst, _ = compare_with(rc, lambda t, y, h: q1.evaluate(t, y, h))
    criterion.check("example1", rc.well_defined and worst <= 1e-8, worst)
    rc = reconstruct_quadruple(catalog.harmonic_solution(ONE), ReconstructConfig(samples=64))
    q2 = example2_parametric(ONE)
    worst, _ = compare_with(rc, lambda t, y, h: q2.evaluate_at(t, y, h, lambda lam: solve_S_for_lambda(lam, 1)))
    criterion.check("example2", rc.well_defined and worst <= 1e-6, worst)
    assert criterion.ok


@pytest.mark.criterion(9)
def test_simulator(criterion):
    start = time.perf_counter()
    rossby = catalog.get("rossby", A=1, k=1, beta=1)
    res = run(RunConfig(rossby, N=64, dt=1e-3, T=2 * math.pi))
    criterion.check("final Linf", res.final_linf <= 1e-6, res.final_linf)
    criterion.check("enstrophy drift", res.relative_drift("enstrophy") <= 1e-8, res.relative_drift("enstrophy"))
    drift = stationarity_drift(catalog.zonal_flow("sin(y)"))
    criterion.check("zonal per-step", drift <= 1e-12, drift)
    slope, _ = temporal_convergence(rossby)
    criterion.check("temporal slope", abs(slope - 4) <= 0.5, slope)
    elapsed = time.perf_counter() - start
    criterion.check("seconds", elapsed < 60, elapsed)
    assert criterion.ok


@pytest.mark.criterion(10)
def test_fd_residual_grid(criterion):
    harmonic = catalog.harmonic_solution(1)
    res = fd_residual_grid(harmonic, "t=0:1,x=1:2,y=-0.4:0.4", 0.02, order=2)
    criterion.check("harmonic order", abs(res.observed_order - 2) <= 0.2, res.observed_order)
    poly = catalog.polynomial_solution(1, 1, 1)
    worst = max(fd_residual_grid(poly, "t=0:1,x=-2:2,y=-2:2", h, refine=False).max_abs for h in (0.5, 0.1, 0.01, 1e-3))
    criterion.check("cubic exactness", worst <= 1e-10, worst)
    assert criterion.ok

