"""Solutions linear in y: the reduced resolving system and its tabulated pairs.

For ``H = Q(t, x)`` (more generally ``H_xy = H_yy = 0``) the automorphic system
reduces to ``H_xx = V(t, h)``, ``H_y H_xx - H_tx = U(t, h)`` with ``W = Z = 0``,
and the resolving system collapses to two equations in ``(t, h)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import mpmath
import numpy as np

from ..catalog import SolutionRecord
from ..expr import Expr, as_expr, diff, parse, simplify
from ..expr.numeric import Box, eval_numeric, lambdify
from ..model import Xinf, apply_transform
from .quadruple import FoliationError, TabulatedQuadruple, resolving_residuals

DPS = 40


def example3_reduced_system(U, V, beta) -> Tuple[Expr, Expr]:
    """``(V U_h - beta h, V_t - U V_h + beta h)``."""
    U, V, b = (parse(v) if isinstance(v, str) else as_expr(v) for v in (U, V, beta))
    h = parse("h")
    r1 = V * diff(U, "h") - b * h
    r2 = diff(V, "t") - U * diff(V, "h") + b * h
    return simplify(r1), simplify(r2)


@dataclass(frozen=True)
class Window:
    """``lo(t) < x < hi(t)``; the x-interval on which ``h = H_x`` is inverted."""

    lo: Expr
    hi: Expr

    def at(self, t) -> Tuple[object, object]:
        return eval_numeric(self.lo, {"t": t}, DPS), eval_numeric(self.hi, {"t": t}, DPS)

    def shifted(self, f) -> "Window":
        f = as_expr(f)
        return Window(simplify(self.lo + f), simplify(self.hi + f))

    def box(self, t_range=(0, 1), y_range=(-1, 1)) -> Box:
        """Sampling box with x inside the window at each t."""
        return Box.of(t=t_range, x=(self.lo, self.hi), y=y_range)


def rossby_window(rec: SolutionRecord, inset: float = 0.5) -> Window:
    """Phase window ``k x + (beta/k) t`` in ``(inset, pi - inset)``.

    ``H_x = A k cos(phase)`` is strictly monotone there, so h determines x.
    The inset keeps ``sqrt(A^2 k^2 - h^2)`` away from zero, where the table's
    finite differences would lose accuracy.
    """
    k, b = rec.params["k"], rec.params["beta"]
    ins = as_expr(inset)
    lo = (ins - b / k * parse("t")) / k
    hi = (parse("pi") - ins - b / k * parse("t")) / k
    if float(eval_numeric(k, {})) < 0:
        lo, hi = hi, lo
    return Window(simplify(lo), simplify(hi))


def _solution_expr(source) -> Expr:
    return source.expr if isinstance(source, SolutionRecord) else as_expr(source)


class Example3Pair(TabulatedQuadruple):
    """Tabulated ``(U, V)`` over ``(t, h)`` with ``W = Z = 0``."""


def example3_pair_from_Q(source, window: Optional[Window] = None, *, t_range=(0.0, 1.0), n_t: int = 9,
                         n_h: int = 17, y0=0.3, check_points: int = 201) -> Example3Pair:
    """Tabulate ``V = H_xx`` and ``U = H_y H_xx - H_tx`` at the x solving ``H_x = h``.

    ``source`` is a catalog record or an expression with ``H_xy = H_yy = 0``.
    ``H_xx`` must keep one sign on the window (h -> x invertible); otherwise
    :class:`FoliationError` is raised.  The evaluator re-inverts exactly
    (bisection at 40 digits), and the table stores a regular ``(t, h)`` grid.
    """
    H = _solution_expr(source)
    if window is None:
        if isinstance(source, SolutionRecord) and source.name == "rossby":
            window = rossby_window(source)
        else:
            raise FoliationError("a window is required for this solution")
    hx = simplify(diff(H, "x"))
    hxx = simplify(diff(H, "x", "x"))
    ulhs = simplify(diff(H, "y") * hxx - diff(H, "t", "x"))
    f_hx = lambdify(hx, ["t", "x", "y"], "mpmath")
    f_hxx = lambdify(hxx, ["t", "x", "y"], "mpmath")
    f_u = lambdify(ulhs, ["t", "x", "y"], "mpmath")
    np_hxx = lambdify(hxx, ["t", "x", "y"], "numpy")

    ts = np.linspace(*t_range, n_t)
    sign = None
    for t in ts:
        lo, hi = (float(v) for v in window.at(t))
        xs = np.linspace(lo, hi, check_points)
        vals = np.broadcast_to(np.asarray(np_hxx(np.full_like(xs, t), xs, np.zeros_like(xs)), dtype=float), xs.shape)
        s = np.sign(vals)
        if np.any(s == 0) or np.any(s != s[0]) or (sign is not None and s[0] != sign):
            raise FoliationError("H_x is not strictly monotone in x on the window (h -> x not invertible)")
        sign = s[0]
    for name, e in (("H_xy", diff(H, "x", "y")), ("H_yy", diff(H, "y", "y"))):
        if simplify(e) != as_expr(0):
            raise FoliationError(f"{name} does not vanish; the (t, h) reduction does not apply")
    y0 = mpmath.mpf(y0)

    def invert(t, h):
        lo, hi = window.at(t)
        with mpmath.workdps(DPS):
            flo = f_hx(t, lo, y0) - h
            fhi = f_hx(t, hi, y0) - h
            if flo * fhi > 0:
                raise FoliationError(f"h={mpmath.nstr(h, 8)} is outside H_x(window) at t={mpmath.nstr(t, 8)}")
            for _ in range(200):
                mid = (lo + hi) / 2
                fm = f_hx(t, mid, y0) - h
                if fm == 0 or hi - lo < mpmath.mpf(10) ** (-DPS - 2):
                    return mid
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            return (lo + hi) / 2

    def evaluator(t, h):
        with mpmath.workdps(DPS):
            t, h = mpmath.mpf(t), mpmath.mpf(h)
            x = invert(t, h)
            zero = mpmath.mpf(0)
            return (f_u(t, x, y0), f_hxx(t, x, y0), zero, zero)

    # common h-range over all tabulated times
    his, los = [], []
    for t in ts:
        a, b = window.at(t)
        ha, hb = float(f_hx(t, a, y0)), float(f_hx(t, b, y0))
        los.append(min(ha, hb))
        his.append(max(ha, hb))
    h_lo, h_hi = max(los), min(his)
    if not h_lo < h_hi:
        raise FoliationError("no common h-range across the tabulated times")
    pad = 1e-3 * (h_hi - h_lo)
    hs = np.linspace(h_lo + pad, h_hi - pad, n_h)
    rows = []
    for t in ts:
        for h in hs:
            U, V, _, _ = evaluator(t, h)
            rows.append((t, h, float(U), float(V), 0.0, 0.0))
    return Example3Pair(
        coords=("t", "h"),
        rows=np.array(rows, dtype=float),
        evaluator=evaluator,
        tag="{Y2}",
        label="example3",
        window={"x_lo": str(window.lo), "x_hi": str(window.hi), "t": [float(t_range[0]), float(t_range[1])],
                "h": [float(hs[0]), float(hs[-1])]},
    )


def example3_residuals(pair: Example3Pair, beta, points=None):
    """The reduced resolving system on the table (central differences + Richardson)."""
    return resolving_residuals(pair, beta, points=points)


def equivalent_solution(Q, q="sin(t)") -> Tuple[Expr, Expr]:
    """``H2 = Q(t, x - F) - q y`` with ``F = int q dt``; returns ``(H2, F)``.

    This is the X-infinity transform with ``f = F``, ``g = 0`` and unit group
    parameter, which keeps ``H_y H_xx - H_tx`` and ``H_xx`` as functions of
    ``(t, h)``.
    """
    q = parse(q) if isinstance(q, str) else as_expr(q)
    F = _antiderivative(q)
    if simplify(diff(F, "t") - q) != as_expr(0):
        raise FoliationError(f"could not integrate q = {q}")
    return apply_transform(_solution_expr(Q), Xinf(F, 0, 1)), F


_TABLE = {"sin(t)": "-cos(t)", "cos(t)": "sin(t)", "0": "0", "1": "t", "t": "t^2/2"}


def _antiderivative(q: Expr) -> Expr:
    key = str(q)
    if key in _TABLE:
        return parse(_TABLE[key])
    raise FoliationError(f"no antiderivative known for q = {key}; pass a q from {sorted(_TABLE)}")


def equivalence_check(rec: SolutionRecord, q="sin(t)", *, t_range=(0.0, 1.0), n_t: int = 5, n_h: int = 9):
    """Tabulate (U, V) from ``Q`` and from its transform; return both tables and the max difference."""
    window = rossby_window(rec) if rec.name == "rossby" else None
    pair1 = example3_pair_from_Q(rec, window, t_range=t_range, n_t=n_t, n_h=n_h)
    H2, F = equivalent_solution(rec, q)
    pair2 = example3_pair_from_Q(H2, window.shifted(F), t_range=t_range, n_t=n_t, n_h=n_h)
    worst = 0.0
    with mpmath.workdps(DPS):
        for row in pair1.rows:
            a = pair1.evaluator(row[0], row[1])
            b = pair2.evaluator(row[0], row[1])
            worst = max(worst, max(float(abs(u - v)) for u, v in zip(a, b)))
    return pair1, pair2, H2, worst


__all__ = [
    "Example3Pair",
    "Window",
    "equivalence_check",
    "equivalent_solution",
    "example3_pair_from_Q",
    "example3_reduced_system",
    "example3_residuals",
    "rossby_window",
]
