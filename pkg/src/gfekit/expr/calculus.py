"""Symbolic differentiation."""
from __future__ import annotations

from typing import Dict, Tuple

from .nodes import (
    ONE,
    ZERO,
    Add,
    Call,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Sym,
    add,
    cos,
    mul,
    neg,
    power,
    sin,
    sqrt,
    replace,
)

_CACHE: Dict[Tuple[Expr, str], Expr] = {}
_CACHE_LIMIT = 200_000


def derivative(e: Expr, var: str) -> Expr:
    """Raw derivative built with the smart constructors (not canonicalised).

    Results are memoised per (node, variable) so repeated differentiation of a
    shared DAG stays linear in its size.
    """
    if isinstance(var, Sym):
        var = var.name
    key = (e, var)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    out = _d(e, var)
    if len(_CACHE) > _CACHE_LIMIT:
        _CACHE.clear()
    _CACHE[key] = out
    return out


def _d(e: Expr, v: str) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == v else ZERO
    if isinstance(e, Func):
        if all(a.name != v for a in e.args):
            return ZERO
        return Func(e.name, e.args, e.derivs + (v,))
    if isinstance(e, Add):
        return add(*(derivative(t, v) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            df = derivative(f, v)
            if df == ZERO:
                continue
            terms.append(mul(*fs[:i], df, *fs[i + 1 :]))
        return add(*terms)
    if isinstance(e, Pow):
        db = derivative(e.base, v)
        if db == ZERO:
            return ZERO
        return mul(Const(e.exp), power(e.base, e.exp - 1), db)
    if isinstance(e, Call):
        da = derivative(e.arg, v)
        if da == ZERO:
            return ZERO
        a = e.arg
        if e.fn == "sin":
            outer = cos(a)
        elif e.fn == "cos":
            outer = neg(sin(a))
        elif e.fn == "tan":
            outer = add(ONE, power(e, 2))
        elif e.fn == "arctan":
            outer = power(add(ONE, power(a, 2)), -1)
        elif e.fn == "exp":
            outer = e
        else:  # pragma: no cover - guarded by Call constructor
            raise ValueError(f"cannot differentiate {e.fn}")
        return mul(outer, da)
    raise TypeError(f"cannot differentiate {type(e).__name__}")


def differentiate(e: Expr, var, times: int = 1, canonical: bool = True) -> Expr:
    """Return the ``times``-th partial derivative of ``e`` with respect to ``var``.

    With ``canonical=True`` (default) the result is passed through
    :func:`~gfekit.expr.canonical.simplify`.
    """
    from .canonical import simplify

    out = e
    for _ in range(times):
        out = derivative(out, var)
    return simplify(out) if canonical else out


def diff(e: Expr, *vars, canonical: bool = False) -> Expr:
    """Mixed partial derivative ``d^n e / d vars[0] ... d vars[-1]`` (raw by default)."""
    out = e
    for v in vars:
        out = derivative(out, v)
    if canonical:
        from .canonical import simplify

        out = simplify(out)
    return out


def cos_as_sqrt(e: Expr, angle: Expr) -> Expr:
    """Rewrite ``cos(angle)`` as ``sqrt(1 - sin(angle)^2)``.

    Valid on the branch where ``cos(angle) > 0``; this is the convention that
    turns the derivative of ``sin`` back into a function of ``sin`` alone.
    """
    c = cos(angle)
    s = sin(angle)
    return replace(e, {c: sqrt(add(ONE, neg(power(s, 2))))})
