"""Direct finite-difference substitution of a solution into the GFE."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import mpmath

from ..catalog import SolutionRecord
from ..expr import as_expr, substitute
from ..expr.nodes import free_symbols
from ..expr.numeric import Box, eval_numeric, lambdify

DPS = 40
AXES = ("t", "x", "y")


@lru_cache(maxsize=None)
def stencil_weights(deriv: int, order: int) -> Tuple[Tuple[int, Fraction], ...]:
    """Central stencil ``((offset, weight), ...)`` for ``d^deriv/dx^deriv`` with error ``O(h^order)``.

    Weights solve the Vandermonde system ``sum w_j j^k = k! [k == deriv]``
    in exact rationals.  Multiply by ``h^-deriv`` when applying.
    """
    if deriv < 0 or order not in (2, 4, 6):
        raise ValueError("order must be 2, 4 or 6")
    if deriv == 0:
        return ((0, Fraction(1)),)
    p = (deriv + 1) // 2 - 1 + order // 2
    offs = list(range(-p, p + 1))
    n = len(offs)
    A = [[Fraction(j) ** k for j in offs] + [Fraction(math.factorial(k)) if k == deriv else Fraction(0)] for k in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    w = [A[i][n] / A[i][i] for i in range(n)]
    return tuple((j, wj) for j, wj in zip(offs, w) if wj != 0)


# derivative multi-indices (t, x, y) needed by the residual
_TERMS = {
    "H_x": (0, 1, 0),
    "H_y": (0, 0, 1),
    "H_txx": (1, 2, 0),
    "H_tyy": (1, 0, 2),
    "H_xxx": (0, 3, 0),
    "H_xyy": (0, 1, 2),
    "H_xxy": (0, 2, 1),
    "H_yyy": (0, 0, 3),
}


def residual_from_jet(d: Dict[str, object], beta):
    """``w_t - H_y w_x + H_x w_y + beta H_x`` from derivative values."""
    w_t = d["H_txx"] + d["H_tyy"]
    w_x = d["H_xxx"] + d["H_xyy"]
    w_y = d["H_xxy"] + d["H_yyy"]
    return w_t - d["H_y"] * w_x + d["H_x"] * w_y + beta * d["H_x"]


@dataclass
class FdResult:
    spacing: float
    order: int
    points: List[Dict[str, float]]
    residuals: List[float]
    refined_residuals: List[float] = field(default_factory=list)

    @property
    def max_abs(self) -> float:
        return max(abs(r) for r in self.residuals)

    @property
    def refined_max_abs(self) -> Optional[float]:
        return max(abs(r) for r in self.refined_residuals) if self.refined_residuals else None

    @property
    def observed_order(self) -> Optional[float]:
        """``log2(max|r(h)| / max|r(h/2)|)``; ``None`` if either is at round-off."""
        a, b = self.max_abs, self.refined_max_abs
        if b is None or a <= 1e-30 or b <= 1e-30:
            return None
        return math.log2(a / b)


def _grid(box: Box, per_axis: int) -> List[Dict[str, float]]:
    pts: List[Dict[str, float]] = [{}]
    for iv in box.intervals:
        nxt = []
        for p in pts:
            lo = float(eval_numeric(iv.lo, p))
            hi = float(eval_numeric(iv.hi, p))
            vals = [lo] if lo == hi else [lo + (hi - lo) * i / (per_axis - 1) for i in range(per_axis)]
            nxt.extend(dict(p, **{iv.name: v}) for v in vals)
        pts = nxt
    return pts


def _residuals(f, pts, hs: float, order: int, beta, rec: SolutionRecord) -> List[float]:
    out = []
    with mpmath.workdps(DPS):
        h = mpmath.mpf(hs)
        b = mpmath.mpf(beta)
        for p in pts:
            base = [mpmath.mpf(p.get(a, 0.0)) for a in AXES]
            cache: Dict[Tuple[int, int, int], object] = {}

            def H(off):
                v = cache.get(off)
                if v is None:
                    q = [c + o * h for c, o in zip(base, off)]
                    if not rec.is_valid_at(dict(zip(AXES, (float(c) for c in q)))):
                        raise ValueError(f"stencil point {tuple(float(c) for c in q)} leaves the validity domain ({rec.domain_note})")
                    v = cache[off] = f(*q)
                return v

            jet = {}
            for name, idx in _TERMS.items():
                sts = [stencil_weights(n, order) for n in idx]
                acc = mpmath.mpf(0)
                for combo in itertools.product(*sts):
                    w = Fraction(1)
                    for _, wj in combo:
                        w *= wj
                    acc += mpmath.mpf(w.numerator) / w.denominator * H(tuple(o for o, _ in combo))
                jet[name] = acc / h ** sum(idx)
            out.append(float(residual_from_jet(jet, b)))
    return out


def fd_residual_grid(rec: SolutionRecord, box, spacing: float, order: int = 2, *, per_axis: int = 3,
                     refine: bool = True, beta=None) -> FdResult:
    """Discrete GFE residual at a grid of points in ``box``.

    Every derivative is a tensor product of central stencils of the given
    ``order`` with step ``spacing`` in t, x and y; values of H are computed
    at 40 digits so the result reflects truncation error only.  With
    ``refine`` the grid is re-evaluated at ``spacing / 2`` to estimate the
    observed order.  Stencils reaching outside the record's validity domain
    raise :class:`ValueError`.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    box = Box.parse(box) if isinstance(box, str) else box
    H = rec.expr
    b = rec.beta if beta is None else as_expr(beta)
    H = substitute(H, {"beta": b})
    if free_symbols(b) or free_symbols(H) - {"t", "x", "y", "pi"}:
        raise ValueError("bind all parameters (including beta) before building a residual grid")
    f = lambdify(H, list(AXES), "mpmath")
    pts = _grid(box, per_axis)
    for p in pts:
        if not rec.is_valid_at({a: p.get(a, 0.0) for a in AXES}):
            raise ValueError(f"box point {p} lies outside the validity domain ({rec.domain_note})")
    bval = eval_numeric(b, {}, DPS)
    res = FdResult(spacing, order, pts, _residuals(f, pts, spacing, order, bval, rec))
    if refine:
        res.refined_residuals = _residuals(f, pts, spacing / 2, order, bval, rec)
    return res
