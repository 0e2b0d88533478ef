"""Render expressions in the same infix grammar the parser accepts."""
from __future__ import annotations

from fractions import Fraction

from .nodes import Add, Call, Const, Expr, Func, Mul, Pow, Sym, neg

# binding levels
_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def _frac(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _level(e: Expr) -> int:
    if isinstance(e, Add):
        return _SUM
    if isinstance(e, Mul):
        first = e.factors[0]
        if isinstance(first, Const) and first.value < 0:
            return _UNARY
        return _PRODUCT
    if isinstance(e, Const):
        if e.value < 0:
            return _UNARY
        return _ATOM if e.value.denominator == 1 else _PRODUCT
    if isinstance(e, Pow):
        return _ATOM if e.exp == Fraction(1, 2) else _POWER
    return _ATOM


def _wrap(e: Expr, min_level: int) -> str:
    s = render(e)
    return f"({s})" if _level(e) < min_level else s


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    if isinstance(e, Mul):
        first = e.factors[0]
        return isinstance(first, Const) and first.value < 0
    return False


def render(e: Expr) -> str:
    """Return text that parses back to a structurally equal expression."""
    if isinstance(e, Const):
        return _frac(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Func):
        args = ", ".join(a.name for a in e.args)
        if e.derivs:
            return f"{e.name}[{','.join(e.derivs)}]({args})"
        return f"{e.name}({args})"
    if isinstance(e, Call):
        return f"{e.fn}({render(e.arg)})"
    if isinstance(e, Pow):
        if e.exp == Fraction(1, 2):
            return f"sqrt({render(e.base)})"
        base = _wrap(e.base, _ATOM)
        if isinstance(e.base, Const) and e.base.value.denominator != 1:
            base = f"({render(e.base)})"
        if e.exp.denominator == 1 and e.exp > 0:
            return f"{base}^{e.exp.numerator}"
        return f"{base}^({_frac(e.exp)})"
    if isinstance(e, Mul):
        factors = list(e.factors)
        prefix = ""
        head = factors[0]
        if isinstance(head, Const):
            if head.value == -1:
                prefix = "-"
                factors = factors[1:]
            elif head.value < 0:
                prefix = "-"
                factors[0] = Const(-head.value)
        parts = []
        for i, f in enumerate(factors):
            if isinstance(f, Const):
                parts.append(_frac(f.value))
            else:
                parts.append(_wrap(f, _POWER if isinstance(f, Mul) else _PRODUCT + 1))
        body = "*".join(parts)
        if prefix and len(factors) == 1 and _level(factors[0]) == _SUM:
            return f"-({render(factors[0])})"
        return prefix + body
    if isinstance(e, Add):
        out = []
        for i, t in enumerate(e.terms):
            if i == 0:
                out.append(_wrap(t, _UNARY) if _level(t) == _SUM else render(t))
            elif _is_negative(t):
                out.append(" - " + _wrap(neg(t), _PRODUCT))
            else:
                out.append(" + " + _wrap(t, _PRODUCT))
        return "".join(out)
    raise TypeError(f"cannot render {type(e).__name__}")
