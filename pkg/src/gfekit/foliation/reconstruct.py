"""Recover a tabulated quadruple from a known solution and test that it is a function."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from ..catalog import SolutionRecord
from ..expr import Expr, add, as_expr, diff, mul, neg, parse, simplify
from ..expr.nodes import free_symbols
from ..expr.numeric import DEFAULT_SEED, Box, eval_numeric, lambdify, sample_points
from .quadruple import AUTOMORPHIC_NAMES, FoliationError, TabulatedQuadruple

DELTA_IN = 1e-9
DELTA_OUT = 1e-6
DPS = 40


@dataclass
class ReconstructConfig:
    """Sampling settings.

    ``branch`` (expression in t, x, y) must be positive at every sample and
    every partner point; it selects one sheet when ``h -> x`` is multivalued.
    ``scan`` is the number of x-grid points used to look for partners.
    """

    samples: int = 64
    seed: int = DEFAULT_SEED
    box: Optional[Box] = None
    branch: Optional[Expr] = None
    delta_in: float = DELTA_IN
    delta_out: float = DELTA_OUT
    scan: int = 400


@dataclass
class Collision:
    first: Dict[str, float]
    second: Dict[str, float]
    outputs_first: Tuple[float, ...]
    outputs_second: Tuple[float, ...]
    gap: float
    kind: str  # "sample" (both sampled) or "partner" (found by the x-scan)

    def to_json(self) -> Dict[str, object]:
        return {
            "first": self.first,
            "second": self.second,
            "outputs_first": list(self.outputs_first),
            "outputs_second": list(self.outputs_second),
            "gap": self.gap,
            "kind": self.kind,
        }


@dataclass
class Reconstruction:
    quadruple: TabulatedQuadruple
    well_defined: bool
    collisions: List[Collision] = field(default_factory=list)
    sample_pairs: int = 0
    partners: int = 0
    points: List[Dict[str, float]] = field(default_factory=list)
    outputs: List[Tuple[object, ...]] = field(default_factory=list)  # extended precision

    @property
    def verdict(self) -> str:
        return "well-defined" if self.well_defined else "ill-defined"


def default_branch(rec: SolutionRecord) -> Optional[Expr]:
    """Branch selector used by default: ``y H_xx > 0`` for the polynomial family.

    That sheet carries the non-negative root ``Vt = sqrt(...)/4`` of the
    closed-form quadruple.
    """
    if rec.name == "polynomial":
        return simplify(mul(parse("y"), diff(rec.expr, "x", "x")))
    return None


def _lhs(H: Expr) -> Tuple[Expr, ...]:
    return (
        simplify(add(mul(diff(H, "y"), diff(H, "x", "x")), neg(diff(H, "t", "x")))),
        simplify(diff(H, "x", "x")),
        simplify(diff(H, "x", "y")),
        simplify(diff(H, "y", "y")),
    )


class _Source:
    """Compiled H_x, the four left-hand sides and the branch selector."""

    def __init__(self, H: Expr, box: Box, branch: Optional[Expr], scan: int):
        H = as_expr(H)
        extra = free_symbols(H) - {"t", "x", "y", "pi"}
        if extra:
            raise FoliationError(f"bind the parameters {sorted(extra)} before reconstructing")
        self.box = box
        self.scan = scan
        hx = simplify(diff(H, "x"))
        self.hx_np = lambdify(hx, ["t", "x", "y"], "numpy")
        self.hx_mp = lambdify(hx, ["t", "x", "y"], "mpmath")
        self.lhs_mp = [lambdify(e, ["t", "x", "y"], "mpmath") for e in _lhs(H)]
        self.branch_np = lambdify(branch, ["t", "x", "y"], "numpy") if branch is not None else None
        self.branch_mp = lambdify(branch, ["t", "x", "y"], "mpmath") if branch is not None else None
        self.x_iv = next(iv for iv in box.intervals if iv.name == "x")

    def h(self, t, x, y):
        with mpmath.workdps(DPS):
            return self.hx_mp(mpmath.mpf(t), mpmath.mpf(x), mpmath.mpf(y))

    def outputs(self, t, x, y) -> Tuple[object, ...]:
        with mpmath.workdps(DPS):
            a = (mpmath.mpf(t), mpmath.mpf(x), mpmath.mpf(y))
            return tuple(f(*a) for f in self.lhs_mp)

    def on_branch(self, t, x, y) -> bool:
        if self.branch_mp is None:
            return True
        with mpmath.workdps(DPS):
            return self.branch_mp(mpmath.mpf(t), mpmath.mpf(x), mpmath.mpf(y)) > 0

    def _valid(self, t, xs, y) -> np.ndarray:
        ok = np.ones_like(xs, dtype=bool)
        for i, x in enumerate(xs):
            ok[i] = self.box.contains({"t": t, "x": x, "y": y})
        if self.branch_np is not None:
            b = np.broadcast_to(np.asarray(self.branch_np(np.full_like(xs, t), xs, np.full_like(xs, y)), float), xs.shape)
            ok &= b > 0
        return ok

    def solve_x(self, t, y, h, exclude: Optional[float] = None) -> List[float]:
        """All x in the box (on the branch) with ``H_x(t, x, y) = h``.

        Returns ``[nan]`` when ``H_x - h`` vanishes identically along the
        scan line (every x is then a partner).
        """
        t, y, h = float(t), float(y), float(h)
        lo = float(eval_numeric(self.x_iv.lo, {"t": t}))
        hi = float(eval_numeric(self.x_iv.hi, {"t": t}))
        xs = np.linspace(lo, hi, self.scan)
        ok = self._valid(t, xs, y)
        vals = np.broadcast_to(np.asarray(self.hx_np(np.full_like(xs, t), xs, np.full_like(xs, y)), float), xs.shape) - h
        if ok.any() and np.all(np.abs(vals[ok]) <= 1e-12 * (1 + abs(h))):
            return [float("nan")]
        f = lambda x: float(self.hx_np(t, x, y)) - h  # noqa: E731
        roots: List[float] = []
        for i in range(len(xs) - 1):
            if not (ok[i] and ok[i + 1]):
                continue
            a, b = vals[i], vals[i + 1]
            if a == 0:
                roots.append(xs[i])
            elif a * b < 0:
                roots.append(brentq(f, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
        if ok[-1] and vals[-1] == 0:
            roots.append(xs[-1])
        tol = 1e-7 * (hi - lo)
        if exclude is not None:
            roots = [r for r in roots if abs(r - exclude) > tol]
        # merge duplicates from neighbouring cells
        out: List[float] = []
        for r in sorted(roots):
            if not out or abs(r - out[-1]) > tol:
                out.append(r)
        return out


def _gap(a: Sequence, b: Sequence) -> float:
    return max(float(abs(u - v)) / (1 + max(float(abs(u)), float(abs(v)))) for u, v in zip(a, b))


def reconstruct_quadruple(rec, cfg: Optional[ReconstructConfig] = None, *, branch="default") -> Reconstruction:
    """Sample ``(t, x, y)``, map to ``(t, y, h = H_x)`` and tabulate the automorphic left-hand sides.

    Well-definedness is tested two ways: sampled pairs closer than
    ``delta_in`` in ``(t, y, h)``, and, for every sample, the other x on the
    same ``(t, y)`` line with the same h (found by scanning x).  A pair whose
    outputs differ by more than ``delta_out`` (relative to ``1 + |value|``)
    is a collision and makes the verdict ill-defined.
    """
    cfg = cfg or ReconstructConfig()
    if isinstance(rec, SolutionRecord):
        H = rec.expr
        box = cfg.box or rec.domain
        br = default_branch(rec) if branch == "default" else branch
    else:
        H = as_expr(rec)
        if cfg.box is None:
            raise FoliationError("a sampling box is required for a bare expression")
        box = cfg.box
        br = None if branch == "default" else branch
    if cfg.branch is not None:
        br = cfg.branch
    br = parse(br) if isinstance(br, str) else br
    for name in ("t", "x", "y"):
        if name not in box.names:
            box = box.extend(Box.of(**{name: 0}))
    if isinstance(rec, SolutionRecord):
        _inside(rec, box)
    src = _Source(H, box, br, cfg.scan)
    constrained = Box(box.intervals, box.constraints + ((br,) if br is not None else ()))
    pts = sample_points(constrained, cfg.samples, cfg.seed)

    rows, outs = [], []
    for p in pts:
        h = src.h(p["t"], p["x"], p["y"])
        o = src.outputs(p["t"], p["x"], p["y"])
        outs.append(o)
        rows.append((p["t"], p["y"], float(h), *(float(v) for v in o)))
    table = np.array(rows, dtype=float)
    result = Reconstruction(quadruple=None, well_defined=True, points=pts, outputs=outs)  # type: ignore[arg-type]

    coords = table[:, :3]
    for i, j in sorted(cKDTree(coords).query_pairs(cfg.delta_in)):
        result.sample_pairs += 1
        g = _gap(outs[i], outs[j])
        if g > cfg.delta_out:
            result.collisions.append(Collision(pts[i], pts[j], _f(outs[i]), _f(outs[j]), g, "sample"))

    for i, p in enumerate(pts):
        h = table[i, 2]
        partners = src.solve_x(p["t"], p["y"], h, exclude=p["x"])
        if partners and np.isnan(partners[0]):
            lo, hi = src.box.bounds_at("x", p)
            partners = [x for x in np.linspace(lo, hi, 5) if src.box.contains({"t": p["t"], "x": x, "y": p["y"]})
                        and src.on_branch(p["t"], x, p["y"])]
        for x2 in partners:
            result.partners += 1
            o2 = src.outputs(p["t"], x2, p["y"])
            g = _gap(outs[i], o2)
            if g > cfg.delta_out:
                q = {"t": p["t"], "x": float(x2), "y": p["y"]}
                result.collisions.append(Collision(p, q, _f(outs[i]), _f(o2), g, "partner"))
    result.well_defined = not result.collisions

    def evaluator(t, y, h):
        xs = src.solve_x(t, y, h)
        if not xs:
            raise FoliationError(f"no x in the sampling box gives h={float(h):.6g} at t={float(t):.6g}, y={float(y):.6g}")
        x = xs[0]
        if np.isnan(x):
            lo, hi = src.box.bounds_at("x", {"t": float(t), "y": float(y)})
            x = 0.5 * (lo + hi)
        else:
            with mpmath.workdps(DPS):
                x = mpmath.findroot(lambda z: src.hx_mp(mpmath.mpf(t), z, mpmath.mpf(y)) - mpmath.mpf(h), mpmath.mpf(x))
        return src.outputs(t, x, y)

    result.quadruple = TabulatedQuadruple(
        coords=("t", "y", "h"),
        rows=table,
        evaluator=evaluator,
        tag=rec.tag if isinstance(rec, SolutionRecord) else "{Y1,Y2,Y3}",
        label=f"reconstructed({rec.key if isinstance(rec, SolutionRecord) else 'expr'})",
        window={"box": _box_text(box), "branch": None if br is None else str(br)},
    )
    return result


def _f(v) -> Tuple[float, ...]:
    return tuple(float(x) for x in v)


def _box_text(box: Box) -> str:
    return ",".join(f"{iv.name}={iv.lo}:{iv.hi}" for iv in box.intervals)


def _inside(rec: SolutionRecord, box: Box, n: int = 32):
    """Reject boxes that leave the record's validity domain (checked at sample points)."""
    dom = rec.domain
    for p in sample_points(box, n, DEFAULT_SEED):
        q = {k: p.get(k, 0.0) for k in dom.names}
        if not dom.contains(q):
            raise FoliationError(f"sampling box leaves the validity domain of {rec.key} ({rec.domain_note}) at {p}")


def compare_with(recon: Reconstruction, evaluate, rows: Optional[Sequence[int]] = None) -> Tuple[float, Optional[Dict[str, object]]]:
    """Max abs difference between table rows and ``evaluate(t, y, h)`` (a 4-tuple)."""
    worst, where = 0.0, None
    table = recon.quadruple.rows
    idx = range(len(table)) if rows is None else rows
    for i in idx:
        t, y, h = table[i, :3]
        other = evaluate(t, y, h)
        for name, a, b in zip(AUTOMORPHIC_NAMES, recon.outputs[i], other):
            d = float(abs(a - b))
            if d > worst:
                worst, where = d, {"row": int(i), "t": float(t), "y": float(y), "h": float(h), "component": name}
    return worst, where


__all__ = [
    "Collision",
    "DELTA_IN",
    "DELTA_OUT",
    "ReconstructConfig",
    "Reconstruction",
    "compare_with",
    "default_branch",
    "reconstruct_quadruple",
]
