"""Quadruples for the polynomial (Example 1) and harmonic (Example 2) solutions."""
from __future__ import annotations

from ..expr import Expr, Sym, as_expr, parse, simplify, substitute
from ..expr.nodes import free_symbols
from ..model import BETA
from .quadruple import ClosedQuadruple, FoliationError, ParametricQuadruple

C1, C2 = Sym("c1"), Sym("c2")

C3 = parse("576*(c1^2 + c2^2) - 48*c2*beta + beta^2")

# Tilde functions of lambda.  ``v`` stands for Vt(lambda).
_VT = "1/4*sqrt(192*c1*lam + c3)"
_WT = "(24*c2 - beta)/(24*c1)*v - c3/(96*c1)"
_ZT = "-beta - v"
# The constant 864*c2*(c1^2 + c2^2) is what the cubic solution actually yields; the printed
# coefficient 96 fails the U relation whenever c2 != 0 (kept as a variant).
_UT = (
    "v/(288*c1^2)*((24*c2 - beta)*v^2 - c3/2*v + {k}*c2*(c1^2 + c2^2)"
    " - beta/16*(beta^2 - 72*beta*c2 + 2880*c1^2 + 1728*c2^2))"
)


def c3_value(c1=C1, c2=C2, beta=BETA) -> Expr:
    return simplify(substitute(C3, {"c1": as_expr(c1), "c2": as_expr(c2), "beta": as_expr(beta)}))


def _param(v, name: str) -> Expr:
    return parse(v) if isinstance(v, str) else as_expr(v)


def example1_tilde(c1=C1, c2=C2, beta=BETA, branch: int = 1, printed: bool = False):
    """``(Ut, Vt, Wt, Zt)`` as expressions in ``lam``."""
    c1e, c2e, be = _param(c1, "c1"), _param(c2, "c2"), _param(beta, "beta")
    if c1e == as_expr(0):
        raise FoliationError("example 1 needs c1 != 0 (c1 appears in denominators of Wt and Ut)")
    if branch not in (1, -1):
        raise FoliationError("branch must be +1 or -1")
    env = {"c1": c1e, "c2": c2e, "beta": be, "c3": substitute(C3, {"c1": c1e, "c2": c2e, "beta": be})}
    v = substitute(parse(_VT), env) * branch
    env_v = dict(env, v=v)
    W = substitute(parse(_WT), env_v)
    Z = substitute(parse(_ZT), env_v)
    U = substitute(parse(_UT.format(k=96 if printed else 864)), env_v)
    return U, v, W, Z


def example1_quadruple(c1=C1, c2=C2, beta=BETA, branch: int = 1, printed: bool = False) -> ClosedQuadruple:
    """Closed quadruple of the {Y1, Y3} reduction for the polynomial solution.

    ``U = y^3 Ut(lam)``, ``V = y Vt``, ``W = y Wt``, ``Z = y Zt`` with
    ``lam = h / y^2``.  ``branch=-1`` selects the negative square root.
    Defined where ``192 c1 h + c3 y^2 > 0`` and ``y != 0``.
    """
    Ut, Vt, Wt, Zt = example1_tilde(c1, c2, beta, branch, printed)
    lam = parse("h/y^2")
    y = Sym("y")
    sub = lambda e: substitute(e, {"lam": lam})  # noqa: E731
    return ClosedQuadruple(
        U=y**3 * sub(Ut),
        V=y * sub(Vt),
        W=y * sub(Wt),
        Z=y * sub(Zt),
        tag="{Y1,Y3}",
        label=f"example1(branch={branch:+d}{', printed' if printed else ''})",
    )


def example1_radicand(c1=C1, c2=C2, beta=BETA) -> Expr:
    """``192 c1 h + c3 y^2``; positive on the quadruple's domain."""
    env = {"c1": _param(c1, "c1"), "c2": _param(c2, "c2"), "beta": _param(beta, "beta")}
    return substitute(parse("192*c1*h + c3*y^2"), {"c1": env["c1"], "c3": substitute(C3, env)})


# -- Example 2 -----------------------------------------------------------

# Relations obtained by pulling the harmonic solution back to
# x = r cos 3th, y = r sin 3th with S = sin th, C = sqrt(1 - S^2).
_C = "sqrt(1 - S^2)"
DERIVED = {
    "lam": f"-4*beta*S^3*{_C}/(4*S^2 - 3)^2",
    "Hxx": "4/3*beta*r*S^5*(9 - 8*S^2)",
    "Hxy": f"4/3*beta*r*S^4*{_C}*(8*S^2 - 5)",
    "Hyy": "1/3*beta*r*S*(32*S^6 - 36*S^4 + 12*S^2 + 1)",
    "U": "2/3*beta^2*r^3*S^7*(8*S^2 - 9)*(8*S^4 - 4*S^2 - 1)",
}
# The relations as they appear in print (see the decisions ledger: they do not
# satisfy the automorphic system for the harmonic solution).
PRINTED = {
    "lam": f"beta*S*(8*S^2 - 3)*{_C}/(4*S^2 - 3)^2",
    "Hxx": "-4/3*beta*r*(8*(6*S^2 - 11)*S^4 + 48*S^2 - 9)*S^3",
    "Hxy": f"-2/3*beta*r*(32*(3*S^2 - 4)*S^4 + 44*S^2 - 3)*S^2*{_C}",
    "Hyy": "1/3*beta*r*(32*(6*S^2 - 11)*S^6 + 24*(8*S^2 - 1)*S^2 + 1)*S",
    "U": "2/3*beta^2*r^3*(48*(S^4 + 1)*S^2 - 88*S^4 - 9)*(16*S^4 - 14*S^2 + 1)*S^5",
}
Y_POLAR = parse("r*(3 - 4*S^2)*S")

#: S-intervals on which lambda(S) is strictly monotone.
PRINTED_MONOTONE_EDGE = 0.4413226508944860
INTERVALS = {"derived": (-0.5, 0.5), "printed": (-PRINTED_MONOTONE_EDGE, PRINTED_MONOTONE_EDGE)}


def example2_relations(form: str = "derived"):
    table = {"derived": DERIVED, "printed": PRINTED}.get(form)
    if table is None:
        raise FoliationError("form must be 'derived' or 'printed'")
    return {k: parse(v) for k, v in table.items()}


def example2_tilde(form: str = "derived", beta=BETA):
    """``(lam, Ut, Vt, Wt, Zt)`` in S, with all r-dependence cancelled exactly."""
    rel = example2_relations(form)
    b = as_expr(beta)
    ypow = {1: Y_POLAR, 3: Y_POLAR**3}
    out = [simplify(substitute(rel["lam"], {"beta": b}))]
    for key, a in (("U", 3), ("Hxx", 1), ("Hxy", 1), ("Hyy", 1)):
        e = simplify(substitute(rel[key] / ypow[a], {"beta": b}))
        if "r" in free_symbols(e):
            raise FoliationError(f"r did not cancel from {key}/y^{a}")
        out.append(e)
    return tuple(out)


def example2_parametric(beta=BETA, form: str = "derived", interval=None) -> ParametricQuadruple:
    """Parametric quadruple for the harmonic solution.

    ``beta`` must be numeric (the chain rule is evaluated numerically).  The
    default ``form="derived"`` uses the relations recomputed from the
    solution; ``form="printed"`` uses the printed ones on the sub-interval
    where their lambda(S) is monotone.
    """
    b = as_expr(beta)
    if free_symbols(b):
        raise FoliationError("example2_parametric needs a numeric beta")
    if b == as_expr(0):
        raise FoliationError("beta must be non-zero")
    lam, Ut, Vt, Wt, Zt = example2_tilde(form, b)
    return ParametricQuadruple(
        lam=lam,
        Ut=Ut,
        Vt=Vt,
        Wt=Wt,
        Zt=Zt,
        interval=interval or INTERVALS[form],
        excluded=(0.0,),
        tag="{Y1,Y3}",
        label=f"example2({form})",
    )
