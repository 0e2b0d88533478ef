"""Quadruples (U, V, W, Z) and the residuals of the automorphic and resolving systems.

A quadruple assigns the four functions of the invariants ``(t, y, h)``:

    H_y H_xx - H_tx = U,   H_xx = V,   H_xy = W,   H_yy = Z      (automorphic)

and is a solution of the resolving system when the five compatibility
conditions below vanish.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from ..expr import Expr, Sym, add, as_expr, diff, mul, neg, simplify, substitute
from ..expr.errors import DomainError
from ..expr.nodes import free_symbols
from ..expr.numeric import DEFAULT_SEED, Box, eval_numeric, lambdify, sample_points

T, Y, H = Sym("t"), Sym("y"), Sym("h")
S = Sym("S")
RESOLVING_NAMES = ("R1", "R2", "R3", "R4", "R5")
AUTOMORPHIC_NAMES = ("U", "V", "W", "Z")


class FoliationError(ValueError):
    pass


@dataclass(frozen=True)
class ClosedQuadruple:
    U: Expr
    V: Expr
    W: Expr
    Z: Expr
    tag: str = "{Y1,Y2,Y3}"
    domain: Optional[Box] = None
    label: str = "closed"

    def __iter__(self):
        return iter((self.U, self.V, self.W, self.Z))

    def evaluate(self, t, y, h, bindings=None, precision="extended"):
        point = {"t": t, "y": y, "h": h}
        point.update(bindings or {})
        return tuple(eval_numeric(e, point, precision) for e in self)


def resolving_system(U, V, W, Z, beta) -> Tuple[Expr, ...]:
    """The five compatibility conditions as raw expressions."""
    U, V, W, Z, b = map(as_expr, (U, V, W, Z, beta))
    d = lambda e, v: diff(e, v)  # noqa: E731
    return (
        add(d(V, "y"), mul(W, d(V, "h")), neg(mul(V, d(W, "h")))),
        add(d(W, "y"), mul(W, d(W, "h")), neg(mul(V, d(Z, "h")))),
        add(d(V, "t"), mul(V, d(U, "h")), neg(mul(U, d(V, "h"))), neg(mul(V, W))),
        add(d(W, "t"), d(U, "y"), mul(W, d(U, "h")), neg(mul(U, d(W, "h"))), neg(mul(V, Z))),
        add(
            d(Z, "t"),
            neg(mul(U, d(Z, "h"))),
            neg(mul(V, d(U, "h"))),
            mul(add(mul(W, d(Z, "h")), mul(V, d(W, "h")), d(Z, "y"), b), H),
            mul(V, W),
        ),
    )


def _resolving_numeric(vals: Dict[str, object], h, beta) -> Tuple[object, ...]:
    """Resolving residuals from values and first derivatives.

    ``vals`` maps ``"V"``, ``"V_h"``, ``"V_y"``, ``"V_t"`` (and likewise for
    U, W, Z) to numbers.
    """
    g = vals.__getitem__
    return (
        g("V_y") + g("W") * g("V_h") - g("V") * g("W_h"),
        g("W_y") + g("W") * g("W_h") - g("V") * g("Z_h"),
        g("V_t") + g("V") * g("U_h") - g("U") * g("V_h") - g("V") * g("W"),
        g("W_t") + g("U_y") + g("W") * g("U_h") - g("U") * g("W_h") - g("V") * g("Z"),
        g("Z_t") - g("U") * g("Z_h") - g("V") * g("U_h")
        + (g("W") * g("Z_h") + g("V") * g("W_h") + g("Z_y") + beta) * h
        + g("V") * g("W"),
    )


@dataclass
class ResidualSamples:
    """Numeric residual values at sample points.

    ``values[i][j]`` is residual ``j`` at ``points[i]``; ``flagged`` lists the
    indices of points sitting on a singular locus (reported, not dropped).
    """

    names: Tuple[str, ...]
    points: List[Dict[str, object]]
    values: List[Tuple[object, ...]]
    flagged: List[int] = field(default_factory=list)
    skipped: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def max_abs(self) -> float:
        best = 0.0
        for i, row in enumerate(self.values):
            if i in self.flagged:
                continue
            for v in row:
                best = max(best, float(abs(v)))
        return best

    def per_residual_max(self) -> Dict[str, float]:
        out = {n: 0.0 for n in self.names}
        for i, row in enumerate(self.values):
            if i in self.flagged:
                continue
            for n, v in zip(self.names, row):
                out[n] = max(out[n], float(abs(v)))
        return out

    def worst(self) -> Optional[Dict[str, object]]:
        best, where = -1.0, None
        for i, row in enumerate(self.values):
            for n, v in zip(self.names, row):
                if float(abs(v)) > best:
                    best, where = float(abs(v)), {"point": self.points[i], "residual": n, "value": float(v)}
        return where


# -- parametric quadruples ----------------------------------------------


@dataclass
class ParametricQuadruple:
    """Quadruple of the {Y1, Y3} reduction given along a curve ``S``.

    ``U = y^3 Ut(lambda)``, ``V = y Vt(lambda)``, ``W = y Wt(lambda)``,
    ``Z = y Zt(lambda)`` with ``lambda = h / y^2 = lam(S)``.  Derivatives in
    ``lambda`` come from the chain rule ``d/dlambda = (d/dS) / lam'(S)``.
    ``interval`` is the open S-interval where ``lam`` is strictly monotone;
    ``excluded`` points (e.g. ``S = 0`` where ``y = 0``) are removed from it.
    """

    lam: Expr
    Ut: Expr
    Vt: Expr
    Wt: Expr
    Zt: Expr
    interval: Tuple[float, float]
    excluded: Tuple[float, ...] = (0.0,)
    tag: str = "{Y1,Y3}"
    label: str = "parametric"
    bindings: Dict[str, object] = field(default_factory=dict)
    dps: int = 40

    def __post_init__(self):
        funcs = {}
        for name in ("lam", "Ut", "Vt", "Wt", "Zt"):
            e = substitute(getattr(self, name), self.bindings) if self.bindings else getattr(self, name)
            extra = free_symbols(e) - {"S", "pi"}
            if extra:
                raise FoliationError(f"{name} depends on unbound symbols {sorted(extra)}")
            funcs[name] = lambdify(e, ["S"], backend="mpmath")
            funcs[name + "_S"] = lambdify(diff(e, "S"), ["S"], backend="mpmath")
        self._f = funcs
        self.monotone_sign = self._check_monotone()

    def _check_monotone(self, n: int = 2001) -> int:
        a, b = self.interval
        with mpmath.workdps(self.dps):
            grid = [mpmath.mpf(a) + (mpmath.mpf(b) - a) * (i + 0.5) / n for i in range(n)]
            vals = [self._f["lam"](s) for s in grid]
        diffs = [q - p for p, q in zip(vals, vals[1:])]
        if all(d > 0 for d in diffs):
            return 1
        if all(d < 0 for d in diffs):
            return -1
        raise FoliationError(f"lambda(S) is not strictly monotone on {self.interval}; the chain rule is invalid there")

    def in_domain(self, s) -> bool:
        a, b = self.interval
        return a < s < b and all(s != e for e in self.excluded)

    def lam_of(self, s):
        with mpmath.workdps(self.dps):
            return self._f["lam"](mpmath.mpf(s))

    def tilde(self, s) -> Dict[str, object]:
        """``Phi(S)`` and ``dPhi/dlambda`` for each tilde function."""
        if not self.in_domain(s):
            raise FoliationError(f"S={s} outside the parametric domain {self.interval} minus {self.excluded}")
        with mpmath.workdps(self.dps):
            s = mpmath.mpf(s)
            ls = self._f["lam_S"](s)
            if ls == 0:
                raise FoliationError(f"lambda'(S) vanishes at S={s}")
            out = {"lam": self._f["lam"](s), "lam_S": ls}
            for name in ("Ut", "Vt", "Wt", "Zt"):
                out[name] = self._f[name](s)
                out[name + "'"] = self._f[name + "_S"](s) / ls
            return out

    def values(self, s, y) -> Dict[str, object]:
        """U, V, W, Z and their (t, y, h)-derivatives at ``(S, y)``."""
        tv = self.tilde(s)
        with mpmath.workdps(self.dps):
            y = mpmath.mpf(y)
            lam = tv["lam"]
            out: Dict[str, object] = {"h": lam * y**2, "lam": lam}
            for name, a in (("U", 3), ("V", 1), ("W", 1), ("Z", 1)):
                f, fp = tv[name + "t"], tv[name + "t'"]
                out[name] = y**a * f
                out[name + "_h"] = y ** (a - 2) * fp
                out[name + "_y"] = a * y ** (a - 1) * f - 2 * y ** (a - 1) * lam * fp
                out[name + "_t"] = mpmath.mpf(0)
            return out

    def evaluate_at(self, t, y, h, solve: Callable) -> Tuple[object, ...]:
        """U, V, W, Z at invariant coordinates, inverting ``lambda = h/y^2``."""
        with mpmath.workdps(self.dps):
            lam = mpmath.mpf(h) / mpmath.mpf(y) ** 2
            s = solve(lam)
            v = self.values(s, y)
            return v["U"], v["V"], v["W"], v["Z"]


# -- tabulated quadruples -----------------------------------------------


@dataclass
class TabulatedQuadruple:
    """Sample table over invariant coordinates with an interpolation rule.

    ``coords`` names the invariant columns (``("t","y","h")`` or ``("t","h")``
    for the reduced Example 3 systems) and ``rows`` holds coordinate values
    followed by U, V, W, Z.  ``evaluator`` (optional) maps coordinates to
    exact outputs by re-solving from the source solution; without it values
    come from piecewise-linear interpolation of the table.
    """

    coords: Tuple[str, ...]
    rows: np.ndarray
    evaluator: Optional[Callable[..., Tuple[object, ...]]] = None
    tag: str = "{Y1,Y2,Y3}"
    label: str = "tabulated"
    window: Optional[Dict[str, object]] = None
    interpolation: str = "linear"
    _interp: object = field(default=None, repr=False)

    @property
    def columns(self) -> Tuple[str, ...]:
        return self.coords + AUTOMORPHIC_NAMES

    def coordinate_range(self, name: str) -> Tuple[float, float]:
        col = self.rows[:, self.coords.index(name)]
        return float(col.min()), float(col.max())

    def evaluate(self, *coords) -> Tuple[object, ...]:
        if self.evaluator is not None:
            return self.evaluator(*coords)
        return tuple(self._interpolate(np.array([[float(c) for c in coords]]))[0])

    def _interpolate(self, pts: np.ndarray) -> np.ndarray:
        from scipy.interpolate import LinearNDInterpolator, NearestNDInterpolator

        if self._interp is None:
            X = self.rows[:, : len(self.coords)]
            keep = [j for j in range(X.shape[1]) if np.ptp(X[:, j]) > 0]
            Fv = self.rows[:, len(self.coords):]
            interp = None
            if len(keep) >= 2 and len(X) > len(keep):
                try:
                    interp = LinearNDInterpolator(X[:, keep], Fv)
                except Exception:  # qhull fails on degenerate point sets
                    interp = None
            if interp is None:
                interp = NearestNDInterpolator(X[:, keep] if keep else X[:, :1], Fv)
            self._interp = (interp, keep)
        interp, keep = self._interp
        out = interp(pts[:, keep] if keep else pts[:, :1])
        if np.any(np.isnan(out)):
            raise FoliationError("point outside the tabulated range")
        return out


def _fd_derivatives(fn: Callable, coords: Sequence, step: Dict[int, object], dps: int = 40):
    """Central differences with one Richardson extrapolation.

    ``D(h) = (f(x+h) - f(x-h)) / 2h`` and the result is ``(4 D(h/2) - D(h)) / 3``.
    """
    with mpmath.workdps(dps):
        base = [mpmath.mpf(c) for c in coords]
        f0 = fn(*base)
        ders = {}
        for j, hstep in step.items():
            def central(hh):
                up = list(base)
                dn = list(base)
                up[j] += hh
                dn[j] -= hh
                fu, fd = fn(*up), fn(*dn)
                return [(a - b) / (2 * hh) for a, b in zip(fu, fd)]

            hh = mpmath.mpf(hstep)
            d1 = central(hh)
            d2 = central(hh / 2)
            ders[j] = [(4 * b - a) / 3 for a, b in zip(d1, d2)]
        return f0, ders


def fd_step(q: TabulatedQuadruple, name: str, rel: float = 1e-4) -> float:
    lo, hi = q.coordinate_range(name)
    span = hi - lo
    return (span if span > 0 else 1.0) * rel


# -- residual dispatch --------------------------------------------------


def resolving_residuals(q, beta, *, canonical: bool = True, points=None, y_values=(1, -0.7, 2.3)):
    """The five resolving-system residuals for ``q``.

    * closed: a tuple of expressions (canonical unless ``canonical=False``);
    * parametric: :class:`ResidualSamples` at ``points`` (S values) times
      ``y_values``;
    * tabulated: :class:`ResidualSamples` at ``points`` (coordinate tuples),
      derivatives by central differences of the evaluator with step
      ``range * 1e-4`` and one Richardson extrapolation.  Points where
      ``V = 0`` are flagged.
    """
    if isinstance(q, ClosedQuadruple):
        res = resolving_system(q.U, q.V, q.W, q.Z, beta)
        return tuple(simplify(r) for r in res) if canonical else res
    if isinstance(q, ParametricQuadruple):
        if points is None:
            points = (-0.45, -0.3, -0.1, 0.1, 0.3, 0.45)
        b = _as_number(beta, q.dps)
        out = ResidualSamples(RESOLVING_NAMES, [], [])
        for s in points:
            for y in y_values:
                v = q.values(s, y)
                with mpmath.workdps(q.dps):
                    out.points.append({"S": s, "y": y, "h": v["h"]})
                    out.values.append(_resolving_numeric(v, v["h"], b))
        return out
    if isinstance(q, TabulatedQuadruple):
        return _tabulated_resolving(q, beta, points)
    raise TypeError(f"not a quadruple: {q!r}")


def _as_number(beta, dps):
    with mpmath.workdps(dps):
        if isinstance(beta, Expr):
            return eval_numeric(beta, {}, dps)
        return mpmath.mpf(beta)


def _tabulated_resolving(q: TabulatedQuadruple, beta, points):
    if q.evaluator is None:
        fn = lambda *c: q.evaluate(*c)  # noqa: E731
        dps = 16
    else:
        fn = q.evaluator
        dps = 40
    b = _as_number(beta, 40)
    if points is None:
        points = [tuple(r[: len(q.coords)]) for r in q.rows]
    steps = {j: fd_step(q, name) for j, name in enumerate(q.coords)}
    out = ResidualSamples(RESOLVING_NAMES if q.coords == ("t", "y", "h") else ("E1", "E2"), [], [])
    for i, pt in enumerate(points):
        try:
            f0, ders = _fd_derivatives(fn, pt, steps, dps=dps)
        except (DomainError, FoliationError) as exc:
            out.skipped.append((i, str(exc)))
            continue
        with mpmath.workdps(dps):
            vals: Dict[str, object] = {}
            for k, name in enumerate(AUTOMORPHIC_NAMES):
                vals[name] = f0[k]
                for j, c in enumerate(q.coords):
                    vals[f"{name}_{c}"] = ders[j][k]
                for c in ("t", "y", "h"):
                    vals.setdefault(f"{name}_{c}", mpmath.mpf(0))
            h = mpmath.mpf(pt[q.coords.index("h")])
            if q.coords == ("t", "y", "h"):
                row = _resolving_numeric(vals, h, b)
            else:
                row = reduced_numeric(vals, h, b)
            out.points.append(dict(zip(q.coords, pt)))
            out.values.append(row)
            if vals["V"] == 0 or abs(vals["V"]) < mpmath.mpf(10) ** (-dps + 5):
                out.flagged.append(len(out.values) - 1)
    return out


def reduced_numeric(vals, h, beta):
    """The reduced resolving system for y-independent solutions (W = Z = 0)."""
    return (
        vals["V"] * vals["U_h"] - beta * h,
        vals["V_t"] - vals["U"] * vals["V_h"] + beta * h,
    )


def automorphic_residuals(Hexpr, q, *, canonical: bool = False, box: Optional[Box] = None, n: int = 64,
                          seed: int = DEFAULT_SEED, solve: Optional[Callable] = None, bindings=None,
                          branch: Optional[Expr] = None):
    """Residuals ``H_y H_xx - H_tx - U``, ``H_xx - V``, ``H_xy - W``, ``H_yy - Z``.

    For a closed quadruple the four expressions are returned with ``h``
    replaced by ``H_x``.  Parametric and tabulated quadruples are sampled on
    ``box`` (seeded); parametric ones need ``solve`` mapping lambda to S.
    ``branch`` is an optional expression that must be positive at a sample
    for it to count (used for radical branches).
    """
    Hexpr = as_expr(Hexpr)
    hx = diff(Hexpr, "x")
    lhs = (
        add(mul(diff(Hexpr, "y"), diff(Hexpr, "x", "x")), neg(diff(Hexpr, "t", "x"))),
        diff(Hexpr, "x", "x"),
        diff(Hexpr, "x", "y"),
        diff(Hexpr, "y", "y"),
    )
    if isinstance(q, ClosedQuadruple):
        out = tuple(add(l, neg(substitute(r, {"h": hx}))) for l, r in zip(lhs, q))
        return tuple(simplify(e) for e in out) if canonical else out
    if box is None:
        raise FoliationError("numeric automorphic residuals need a sampling box")
    bind = dict(bindings or {})
    lhs_f = [substitute(e, bind) for e in lhs]
    hx_f = substitute(hx, bind)
    br = substitute(branch, bind) if branch is not None else None
    out = ResidualSamples(AUTOMORPHIC_NAMES, [], [])
    for i, p in enumerate(sample_points(box, n, seed)):
        if br is not None and eval_numeric(br, p, "extended") <= 0:
            out.skipped.append((i, "outside branch"))
            continue
        with mpmath.workdps(40):
            try:
                left = [eval_numeric(e, p, "extended") for e in lhs_f]
                h = eval_numeric(hx_f, p, "extended")
                if isinstance(q, ParametricQuadruple):
                    if solve is None:
                        raise FoliationError("parametric residuals need a lambda -> S solver")
                    right = q.evaluate_at(p.get("t", 0), p["y"], h, solve)
                elif isinstance(q, TabulatedQuadruple):
                    pt = {"t": p.get("t", 0), "y": p["y"], "h": h}
                    right = q.evaluate(*(pt[c] for c in q.coords))
                else:
                    raise TypeError(f"not a quadruple: {q!r}")
            except (DomainError, FoliationError) as exc:
                out.skipped.append((i, str(exc)))
                continue
            p = dict(p)
            p["h"] = h
            out.points.append(p)
            out.values.append(tuple(a - b for a, b in zip(left, right)))
    return out
