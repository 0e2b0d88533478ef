"""The geopotential forecast equation: residual, invariants and symmetry transforms.

The equation is

    (H_xx + H_yy)_t - H_y (H_xx + H_yy)_x + H_x (H_xx + H_yy)_y + beta H_x = 0

for the geopotential ``H(t, x, y)``.  Transforms are pull-backs: each returns
the transformed solution as an expression in the original coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .expr import (
    Assumptions,
    Expr,
    Sym,
    add,
    as_expr,
    cos,
    derivative,
    diff,
    exp,
    free_symbols,
    mul,
    neg,
    power,
    replace,
    simplify,
    sin,
    sqrt,
    substitute,
)
from .expr.nodes import Call, Func, walk

T, X, Y = Sym("t"), Sym("x"), Sym("y")
BETA = Sym("beta")
H_SYM = Sym("h")
R, THETA, S = Sym("r"), Sym("th"), Sym("S")

Scalar = Union[int, Fraction, float, str, Expr]


def _beta(beta: Optional[Scalar]) -> Expr:
    if beta is None:
        return BETA
    if isinstance(beta, str):
        return Sym(beta)
    return as_expr(beta)


@dataclass(frozen=True)
class GfeParams:
    beta: Expr = BETA

    def __post_init__(self):
        b = as_expr(self.beta) if not isinstance(self.beta, str) else Sym(self.beta)
        object.__setattr__(self, "beta", b)
        if b == as_expr(0):
            raise ValueError("beta must be non-zero")


def _finish(e: Expr, canonical: bool) -> Expr:
    return simplify(e) if canonical else e


def vorticity(H, canonical: bool = True) -> Expr:
    """``H_xx + H_yy``."""
    H = as_expr(H)
    return _finish(add(diff(H, "x", "x"), diff(H, "y", "y")), canonical)


def gfe_residual(H, beta: Optional[Scalar] = None, canonical: bool = True) -> Expr:
    """Left-hand side of the GFE evaluated on ``H``.

    ``beta`` defaults to the symbol ``beta``.  With ``canonical=False`` the raw
    (unsimplified) residual is returned, which is what numeric zero tests use.
    """
    if isinstance(beta, GfeParams):
        beta = beta.beta
    H = as_expr(H)
    b = _beta(beta)
    w = vorticity(H, canonical=False)
    hx = derivative(H, "x")
    hy = derivative(H, "y")
    res = add(
        derivative(w, "t"),
        neg(mul(hy, derivative(w, "x"))),
        mul(hx, derivative(w, "y")),
        mul(b, hx),
    )
    return _finish(res, canonical)


@dataclass(frozen=True)
class InvariantTuple:
    """The second-order differential invariants of the infinite subgroup."""

    t: Expr
    y: Expr
    hx: Expr
    u: Expr  # H_y H_xx - H_tx
    v: Expr  # H_xx
    w: Expr  # H_xy
    z: Expr  # H_yy

    def __iter__(self) -> Iterator[Expr]:
        return iter((self.t, self.y, self.hx, self.u, self.v, self.w, self.z))

    NAMES = ("t", "y", "H_x", "H_y*H_xx - H_tx", "H_xx", "H_xy", "H_yy")


def invariants(H, canonical: bool = True) -> InvariantTuple:
    H = as_expr(H)
    hxx = diff(H, "x", "x")
    u = add(mul(diff(H, "y"), hxx), neg(diff(H, "t", "x")))
    parts = (T, Y, diff(H, "x"), u, hxx, diff(H, "x", "y"), diff(H, "y", "y"))
    return InvariantTuple(*(_finish(p, canonical) for p in parts))


def invariant_lambda(H, canonical: bool = True) -> Expr:
    """``lambda = H_x / y^2``, the invariant of the {Y1, Y3} reduction."""
    return _finish(mul(diff(as_expr(H), "x"), power(Y, -2)), canonical)


# -- transforms ---------------------------------------------------------


@dataclass(frozen=True)
class TimeShift:
    t0: Scalar


@dataclass(frozen=True)
class YShift:
    y0: Scalar


@dataclass(frozen=True)
class Scaling:
    """``H -> e^{3 eps} H(e^{eps} t, e^{-eps} x, e^{-eps} y)``."""

    eps: Scalar


@dataclass(frozen=True)
class Xinf:
    """``x -> x + eps f(t)``, ``H -> H + eps (g(t) - y f'(t))``."""

    f: Scalar
    g: Scalar
    eps: Scalar = 1

    def __post_init__(self):
        for name in ("f", "g"):
            e = as_expr(getattr(self, name))
            extra = free_symbols(e) & {"x", "y", "h"}
            if extra:
                raise ValueError(f"{name} must depend on t only, found {sorted(extra)}")
            if any(isinstance(n, Func) and n.args != (T,) for n in walk(e)):
                raise ValueError(f"{name} may only use undefined functions of t")
            object.__setattr__(self, name, e)
        object.__setattr__(self, "eps", as_expr(self.eps))


Transform = Union[TimeShift, YShift, Scaling, Xinf]


def apply_transform(H, tr: Transform, canonical: bool = True) -> Expr:
    H = as_expr(H)
    if isinstance(tr, TimeShift):
        out = substitute(H, {"t": add(T, neg(as_expr(tr.t0)))})
    elif isinstance(tr, YShift):
        out = substitute(H, {"y": add(Y, neg(as_expr(tr.y0)))})
    elif isinstance(tr, Scaling):
        e = exp(as_expr(tr.eps))
        out = mul(
            power(e, 3),
            substitute(H, {"t": mul(e, T), "x": mul(power(e, -1), X), "y": mul(power(e, -1), Y)}),
        )
    elif isinstance(tr, Xinf):
        eps = tr.eps
        fp = derivative(tr.f, "t")
        shifted = substitute(H, {"x": add(X, neg(mul(eps, tr.f)))})
        out = add(shifted, mul(eps, add(tr.g, neg(mul(Y, fp)))))
    else:
        raise TypeError(f"unknown transform {tr!r}")
    return _finish(out, canonical)


# -- polar pull-back used by the harmonic solutions ----------------------

POLAR_ASSUMPTIONS = Assumptions.of(positive=["r", cos(THETA)])


def to_polar(e: Expr, sin_symbol: bool = True) -> Expr:
    """Pull ``e`` back through ``x = r cos 3th``, ``y = r sin 3th``.

    The principal branch ``arctan(y/x) = 3 th`` is used, valid for ``x > 0``
    (so ``|th| < pi/6``).  With ``sin_symbol`` the result is written in
    ``S = sin th`` with ``cos th = sqrt(1 - S^2)``.
    """
    ratio = simplify(mul(Y, power(X, -1)))
    e = simplify(e)
    e = replace(e, {Call("arctan", ratio): mul(3, THETA)})
    e = substitute(e, {"x": mul(R, cos(mul(3, THETA))), "y": mul(R, sin(mul(3, THETA)))})
    e = simplify(e, POLAR_ASSUMPTIONS)
    if not sin_symbol:
        return e
    e = replace(e, {sin(THETA): S, cos(THETA): sqrt(add(1, neg(power(S, 2))))})
    return simplify(e, Assumptions.of(positive=["r"]))
