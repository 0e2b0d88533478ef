"""The degree-8 polynomial in R = S (quartic in R~ = R^2) and the inversion of lambda(S)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import mpmath

from ..expr.errors import DomainError
from .examples import INTERVALS

FORMS = ("printed", "derived")
DPS = 40


def _mp(v):
    if isinstance(v, float):
        return mpmath.mpf(repr(v))
    return v if isinstance(v, mpmath.mpf) else mpmath.mpf(v)


def lambda_of_S(S, beta, form: str = "derived"):
    """lambda(S) in extended precision."""
    with mpmath.workdps(DPS):
        S, b = _mp(S), _mp(beta)
        C = mpmath.sqrt(1 - S**2)
        den = (4 * S**2 - 3) ** 2
        if form == "derived":
            return -4 * b * S**3 * C / den
        if form == "printed":
            return b * S * (8 * S**2 - 3) * C / den
        raise ValueError(f"form must be one of {FORMS}")


@dataclass(frozen=True)
class QuarticProblem:
    """``a8 R^8 + a6 R^6 + a4 R^4 + a2 R^2 + a0 = 0`` (a quartic in ``R~ = R^2``)."""

    beta: object
    lam: object
    coefficients: Tuple[object, object, object, object, object]  # a8, a6, a4, a2, a0
    form: str = "printed"

    def evaluate(self, Rt):
        """Polynomial value at ``R~``."""
        with mpmath.workdps(DPS):
            return mpmath.polyval(list(self.coefficients), _mp(Rt))

    def relative_residual(self, Rt):
        """``|p(R~)|`` divided by the largest term magnitude."""
        with mpmath.workdps(DPS):
            Rt = _mp(Rt)
            n = len(self.coefficients) - 1
            terms = [c * Rt ** (n - i) for i, c in enumerate(self.coefficients)]
            scale = max(abs(t) for t in terms)
            return abs(mpmath.fsum(terms)) / scale if scale else abs(mpmath.fsum(terms))

    def roots(self) -> List[object]:
        with mpmath.workdps(DPS):
            coeffs = list(self.coefficients)
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()  # factor out R~ = 0
            extra = [mpmath.mpf(0)] * (len(self.coefficients) - len(coeffs))
            if len(coeffs) <= 1:
                return extra
            return extra + list(mpmath.polyroots(coeffs, maxsteps=400, extraprec=200))


def quartic_coefficients(lam, beta, form: str = "printed") -> QuarticProblem:
    """Coefficients of the degree-8 polynomial.

    ``form="printed"`` gives ``64(b^2+4l^2), -(112b^2+768l^2), 57b^2+864l^2,
    -9(b^2+48l^2), 81l^2``; ``form="derived"`` gives the polynomial satisfied by
    the lambda(S) recomputed from the harmonic solution,
    ``l^2 (4R^2 - 3)^4 - 16 b^2 R^6 (1 - R^2)``.
    """
    with mpmath.workdps(DPS):
        b, l = _mp(beta), _mp(lam)
        if b == 0:
            raise ValueError("beta must be non-zero")
        b2, l2 = b * b, l * l
        if form == "printed":
            c = (64 * (b2 + 4 * l2), -(112 * b2 + 768 * l2), 57 * b2 + 864 * l2, -9 * (b2 + 48 * l2), 81 * l2)
        elif form == "derived":
            c = (16 * b2 + 256 * l2, -(16 * b2 + 768 * l2), 864 * l2, -432 * l2, 81 * l2)
        else:
            raise ValueError(f"form must be one of {FORMS}")
    return QuarticProblem(b, l, c, form)


class LambdaOutOfRange(ValueError):
    pass


def lambda_image(beta, form: str = "derived", interval=None) -> Tuple[object, object]:
    a, b = interval or INTERVALS[form]
    la, lb = lambda_of_S(a, beta, form), lambda_of_S(b, beta, form)
    return (min(la, lb), max(la, lb))


def solve_S_for_lambda(lam, beta, form: str = "derived", interval=None, tol=None):
    """Invert lambda(S) on the monotone S-interval by bracketed root finding.

    The derived lambda(S) is monotone on (-1/2, 1/2); the printed one only on
    (-0.44132..., 0.44132...).  Raises :class:`LambdaOutOfRange` when ``lam``
    lies outside the image.
    """
    a, b = interval or INTERVALS[form]
    with mpmath.workdps(DPS):
        lam = _mp(lam)
        fa = lambda_of_S(a, beta, form) - lam
        fb = lambda_of_S(b, beta, form) - lam
        if fa == 0:
            return mpmath.mpf(a)
        if fb == 0:
            return mpmath.mpf(b)
        if fa * fb > 0:
            lo, hi = lambda_image(beta, form, (a, b))
            raise LambdaOutOfRange(f"lambda={mpmath.nstr(lam, 12)} outside the image ({mpmath.nstr(lo, 12)}, {mpmath.nstr(hi, 12)})")
        if lam == 0:
            return mpmath.mpf(0)
        lo, hi = mpmath.mpf(a), mpmath.mpf(b)
        flo = fa
        eps = mpmath.mpf(10) ** (-DPS + 4) if tol is None else mpmath.mpf(tol)
        # bisection to a small bracket, then secant polishing
        for _ in range(60):
            mid = (lo + hi) / 2
            fm = lambda_of_S(mid, beta, form) - lam
            if fm == 0:
                return mid
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        try:
            s = mpmath.findroot(lambda s: lambda_of_S(s, beta, form) - lam, (lo, hi), solver="anderson", tol=eps**2)
        except (ValueError, ZeroDivisionError):
            s = (lo + hi) / 2
        if not (min(lo, hi) - (hi - lo) <= s <= max(lo, hi) + (hi - lo)):
            s = (lo + hi) / 2
        return s


# -- closed-form root ----------------------------------------------------


@dataclass
class ClosedFormRoot:
    """Evaluation of the closed-form R~* together with the cross-check.

    ``value`` is ``None`` when a radical failed; ``error`` then names the
    offending helper (``q1``, ``q2`` or the inner bracket).
    """

    lam: object
    beta: object
    branch: str
    value: Optional[object] = None
    q1: Optional[object] = None
    q2: Optional[object] = None
    q2_radicand: Optional[object] = None
    error: Optional[str] = None
    error_helper: Optional[str] = None
    quartic_roots: List[object] = field(default_factory=list)
    matches_root: bool = False
    matched_root: Optional[object] = None
    physical_root: Optional[object] = None
    matches_physical: bool = False
    printed_inversion_root: Optional[object] = None
    matches_printed_inversion: bool = False

    def summary(self) -> Dict[str, object]:
        f = lambda v: None if v is None else mpmath.nstr(v, 17)  # noqa: E731
        return {
            "lambda": f(self.lam),
            "beta": f(self.beta),
            "branch": self.branch,
            "value": f(self.value),
            "q2_radicand": f(self.q2_radicand),
            "q1": f(self.q1),
            "q2": f(self.q2),
            "error": self.error,
            "error_helper": self.error_helper,
            "quartic_roots": [f(r) for r in self.quartic_roots],
            "matches_root": self.matches_root,
            "matched_root": f(self.matched_root),
            "physical_root": f(self.physical_root),
            "matches_physical": self.matches_physical,
            "printed_inversion_root": f(self.printed_inversion_root),
            "matches_printed_inversion": self.matches_printed_inversion,
        }


def _real_root(v, q: int, helper: str):
    if v < 0:
        if q % 2 == 0:
            raise DomainError(f"even root of negative {helper}", helper)
        return -mpmath.root(-v, q)
    return mpmath.root(v, q)


def closed_form_root(lam, beta, branch: str = "real", match_tol: float = 1e-8) -> ClosedFormRoot:
    """Evaluate the printed closed form R~*(lambda) verbatim.

    ``branch="real"`` takes real radicals and reports a domain error at the
    first negative radicand; ``branch="complex"`` uses principal complex
    branches throughout.  The value is compared with every root of the
    printed quartic (``matches_root``) and with ``S(lambda)^2`` from both
    inversions (``matches_physical`` for the derived lambda(S),
    ``matches_printed_inversion`` for the printed one).
    """
    with mpmath.workdps(DPS):
        l, b = _mp(lam), _mp(beta)
        if b <= 0:
            raise ValueError("the closed form contains sqrt(beta); beta must be positive")
        out = ClosedFormRoot(l, b, branch)
        out.quartic_roots = quartic_coefficients(l, b, "printed").roots()
        for form, attr in (("derived", "physical_root"), ("printed", "printed_inversion_root")):
            try:
                setattr(out, attr, solve_S_for_lambda(l, b, form) ** 2)
            except LambdaOutOfRange:
                pass
        rad = 9216 * l**4 + 9204 * b**2 * l**2 - 125 * b**4
        out.q2_radicand = rad
        try:
            if branch == "real":
                root = lambda v, q, name: _real_root(v, q, name)  # noqa: E731
                sq = lambda v, name: _real_root(v, 2, name)  # noqa: E731
            elif branch == "complex":
                root = lambda v, q, name: mpmath.power(mpmath.mpc(v), mpmath.mpf(1) / q)  # noqa: E731
                sq = lambda v, name: mpmath.sqrt(mpmath.mpc(v))  # noqa: E731
            else:
                raise ValueError("branch must be 'real' or 'complex'")
            q2 = 14688 * b * l**2 - 125 * b**3 + 144 * l * sq(rad, "q2")
            out.q2 = q2
            q2_13 = root(q2, 3, "q2")
            q2_23 = q2_13**2
            q1 = b**2 * q2_23 + 11 * b**3 * q2_13 + 25 * b**4 - 2304 * l**4 + (4 * q2_23 - 56 * b * q2_13 - 476 * b**2) * l**2
            out.q1 = q1
            q1_14 = root(q1, 4, "q1")
            q1_12 = q1_14**2
            q1_34 = q1_14**3
            q2_16 = root(q2, 6, "q2")
            q2_12 = q2_16**3
            sb = mpmath.sqrt(b)
            inner = (
                ((22 * b**2 - 112 * l**2) * b * q2_13 - (b**2 + 4 * l**2) * q2_23 + 476 * b**2 * l**2 - 25 * b**4 + 2304 * l**4) * q1_12
                + 1152 * (sb * l**4 + 59 * b ** mpmath.mpf(2.5) * l**2 / 48 + b ** mpmath.mpf(4.5) / 36) * q2_12
            )
            inner_sqrt = sq(inner, "inner bracket")
            if q2_16 == 0 or q1_14 == 0:
                raise DomainError("zero helper in a denominator", "q1" if q1_14 == 0 else "q2")
            value = (sb * q1_34 + (7 * b**2 + 48 * l**2) * q1_14 * q2_16 + sb * inner_sqrt) / (q2_16 * q1_14 * (16 * b**2 + 64 * l**2))
            out.value = value
        except DomainError as exc:
            out.error = str(exc)
            out.error_helper = exc.subexpr
            return out
        tol = mpmath.mpf(match_tol)
        for r in out.quartic_roots:
            if abs(value - r) <= tol * max(1, abs(r)):
                out.matches_root = True
                out.matched_root = r
                break
        close = lambda r: r is not None and abs(value - r) <= tol * max(1, abs(r))  # noqa: E731
        out.matches_physical = close(out.physical_root)
        out.matches_printed_inversion = close(out.printed_inversion_root)
        return out
