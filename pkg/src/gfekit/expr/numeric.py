"""Numeric evaluation, sampling boxes and probabilistic zero testing."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from .errors import DomainError, SamplingError
from .nodes import Add, Call, Const, Expr, Func, Mul, Pow, Sym, as_expr, free_symbols, walk

#: Symbols with a fixed numeric meaning unless explicitly bound.
CONSTANTS = ("pi",)

#: Seed used whenever a caller does not supply one.
DEFAULT_SEED = 1729

STANDARD = "standard"
EXTENDED = "extended"
EXTENDED_DPS = 40

Precision = Union[str, int]


def _dps(precision: Precision) -> Optional[int]:
    """``None`` means IEEE doubles; otherwise an mpmath working precision."""
    if precision == STANDARD:
        return None
    if precision == EXTENDED:
        return EXTENDED_DPS
    if isinstance(precision, int):
        if precision < 30:
            raise ValueError("extended precision needs at least 30 digits")
        return precision
    raise ValueError(f"unknown precision {precision!r}")


class _FloatOps:
    @staticmethod
    def const(v: Fraction):
        return v.numerator / v.denominator

    @staticmethod
    def num(v):
        return float(v)

    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)
    tan = staticmethod(math.tan)
    arctan = staticmethod(math.atan)

    @staticmethod
    def exp(v):
        return math.exp(v)

    @staticmethod
    def pi():
        return math.pi

    @staticmethod
    def root(v, q: int):
        r = abs(v) ** (1.0 / q)
        return -r if v < 0 else r


class _MpOps:
    @staticmethod
    def const(v: Fraction):
        return mpmath.mpf(v.numerator) / v.denominator

    @staticmethod
    def num(v):
        if isinstance(v, Fraction):
            return mpmath.mpf(v.numerator) / v.denominator
        return mpmath.mpf(v)

    sin = staticmethod(mpmath.sin)
    cos = staticmethod(mpmath.cos)
    tan = staticmethod(mpmath.tan)
    arctan = staticmethod(mpmath.atan)
    exp = staticmethod(mpmath.exp)

    @staticmethod
    def pi():
        return +mpmath.pi

    @staticmethod
    def root(v, q: int):
        r = mpmath.root(abs(v), q)
        return -r if v < 0 else r


def _pow(ops, base, e: Fraction, node: Expr):
    if base == 0:
        if e < 0:
            raise DomainError("division by zero", node.base)
        return base * 0
    if e.denominator == 1:
        return base ** e.numerator
    if base < 0 and e.denominator % 2 == 0:
        raise DomainError("even root of a negative number", node.base)
    return ops.root(base, e.denominator) ** e.numerator


def eval_numeric(e, point: Mapping[str, object], precision: Precision = STANDARD):
    """Evaluate ``e`` with every free symbol bound in ``point``.

    ``precision`` is ``"standard"`` (floats), ``"extended"`` (40 digits) or
    an explicit number of digits >= 30.  Undefined functions may be bound to
    callables ``fn(derivs, *args)``.  Raises :class:`DomainError` with the
    offending sub-expression for even roots of negatives and division by zero.
    """
    e = as_expr(e)
    dps = _dps(precision)
    if dps is None:
        return _evaluate(e, point, _FloatOps)
    with mpmath.workdps(dps):
        return +_evaluate(e, point, _MpOps)


def _evaluate(e: Expr, point: Mapping[str, object], ops):
    memo: Dict[int, object] = {}
    values = {}
    for k, v in point.items():
        name = k.name if isinstance(k, Sym) else k
        values[name] = v if callable(v) and not isinstance(v, (int, float, Fraction)) else ops.num(v)

    def go(n: Expr):
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        if isinstance(n, Const):
            out = ops.const(n.value)
        elif isinstance(n, Sym):
            if n.name in values:
                out = values[n.name]
            elif n.name == "pi":
                out = ops.pi()
            else:
                raise KeyError(f"symbol {n.name!r} is unbound")
        elif isinstance(n, Add):
            out = go(n.terms[0])
            for t in n.terms[1:]:
                out = out + go(t)
        elif isinstance(n, Mul):
            out = go(n.factors[0])
            for f in n.factors[1:]:
                out = out * go(f)
        elif isinstance(n, Pow):
            out = _pow(ops, go(n.base), n.exp, n)
        elif isinstance(n, Call):
            a = go(n.arg)
            if n.fn == "tan" and ops.cos(a) == 0:
                raise DomainError("tan at a pole", n)
            out = getattr(ops, n.fn)(a)
        elif isinstance(n, Func):
            fn = values.get(n.name)
            if fn is None or not callable(fn):
                raise KeyError(f"undefined function {n.name!r} is unbound")
            out = ops.num(fn(n.derivs, *(values[a.name] for a in n.args)))
        else:  # pragma: no cover
            raise TypeError(type(n).__name__)
        memo[id(n)] = out
        return out

    return go(e)


# -- compiled evaluators -------------------------------------------------

_NP = {
    "sin": "np.sin",
    "cos": "np.cos",
    "tan": "np.tan",
    "arctan": "np.arctan",
    "exp": "np.exp",
}
_MP = {
    "sin": "mp.sin",
    "cos": "mp.cos",
    "tan": "mp.tan",
    "arctan": "mp.atan",
    "exp": "mp.exp",
}


def lambdify(e, variables: Sequence[str], backend: str = "numpy") -> Callable:
    """Compile ``e`` into a Python function of ``variables``.

    ``backend="numpy"`` vectorises over arrays (even roots of negatives give
    NaN); ``backend="mpmath"`` works on mpf scalars and raises
    :class:`DomainError` like :func:`eval_numeric`.  Shared sub-expressions are
    computed once.
    """
    e = as_expr(e)
    variables = [v.name if isinstance(v, Sym) else v for v in variables]
    missing = free_symbols(e) - set(variables) - set(CONSTANTS)
    if missing:
        raise ValueError(f"unbound symbols: {sorted(missing)}")
    if any(isinstance(n, Func) for n in walk(e)):
        raise ValueError("cannot compile undefined functions")
    names: Dict[Expr, str] = {}
    lines: List[str] = []
    fns = _NP if backend == "numpy" else _MP
    args = [f"a{i}" for i in range(len(variables))]
    table = dict(zip(variables, args))
    table.setdefault("pi", "np.pi" if backend == "numpy" else "(+mp.pi)")

    def const(v: Fraction) -> str:
        if backend == "numpy":
            return repr(v.numerator / v.denominator)
        return f"(mp.mpf({v.numerator})/{v.denominator})"

    def emit(n: Expr) -> str:
        if n in names:
            return names[n]
        if isinstance(n, Const):
            return const(n.value)
        if isinstance(n, Sym):
            return table[n.name]
        if isinstance(n, Add):
            src = " + ".join(emit(t) for t in n.terms)
        elif isinstance(n, Mul):
            src = " * ".join(emit(f) for f in n.factors)
        elif isinstance(n, Pow):
            b = emit(n.base)
            p = n.exp
            if p.denominator == 1:
                src = f"_ipow({b}, {p.numerator})"
            elif p.denominator % 2 == 0:
                src = f"_even({b}, {p.numerator}, {p.denominator})"
            else:
                src = f"_odd({b}, {p.numerator}, {p.denominator})"
        elif isinstance(n, Call):
            src = f"{fns[n.fn]}({emit(n.arg)})"
        else:  # pragma: no cover
            raise TypeError(type(n).__name__)
        name = f"v{len(names)}"
        names[n] = name
        lines.append(f"    {name} = {src}")
        return name

    result = emit(e)
    body = "\n".join(lines) if lines else "    pass"
    src = f"def _f({', '.join(args)}):\n{body}\n    return {result}\n"
    if backend == "numpy":
        env = {"np": np, "_ipow": _np_ipow, "_even": _np_even, "_odd": _np_odd}
    elif backend == "mpmath":
        env = {"mp": mpmath, "_ipow": _mp_ipow, "_even": _mp_even, "_odd": _mp_odd}
    else:
        raise ValueError(f"unknown backend {backend!r}")
    exec(compile(src, "<lambdify>", "exec"), env)
    fn = env["_f"]
    fn.source = src
    fn.variables = tuple(variables)
    return fn


def _np_ipow(b, n):
    if n < 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / np.power(b, -n) if not np.isscalar(b) else 1.0 / (b ** -n) if b != 0 else math.inf
    return b ** n


def _np_even(b, p, q):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.power(np.where(np.asarray(b) >= 0, b, np.nan), p / q)


def _np_odd(b, p, q):
    with np.errstate(divide="ignore"):
        r = np.cbrt(b) if q == 3 else np.sign(b) * np.abs(b) ** (1.0 / q)
        return r ** p


def _mp_ipow(b, n):
    if n < 0 and b == 0:
        raise DomainError("division by zero")
    return b ** n


def _mp_even(b, p, q):
    if b < 0:
        raise DomainError("even root of a negative number")
    if b == 0 and p < 0:
        raise DomainError("division by zero")
    return mpmath.root(b, q) ** p


def _mp_odd(b, p, q):
    if b == 0 and p < 0:
        raise DomainError("division by zero")
    r = mpmath.root(abs(b), q)
    return (-r if b < 0 else r) ** p


# -- sampling boxes -------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    name: str
    lo: Expr
    hi: Expr


@dataclass(frozen=True)
class Box:
    """Ordered sampling box; bounds may depend on earlier variables.

    ``Box.parse("x=0.5:2,y=-0.4*x:0.4*x")`` samples ``x`` first and then ``y``
    between bounds evaluated at that ``x``.  A single value (``t=1``) pins a
    variable.  ``constraints`` are expressions that must evaluate positive;
    points violating them are redrawn.
    """

    intervals: Tuple[Interval, ...]
    constraints: Tuple[Expr, ...] = ()

    @classmethod
    def parse(cls, text: str, constraints: Sequence = ()) -> "Box":
        from .parse import ParseError, parse

        items = []
        seen = set()
        for part in _split_top(text):
            if "=" not in part:
                raise ValueError(f"box entry {part!r} lacks '='")
            name, rng = part.split("=", 1)
            name = name.strip()
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
                raise ValueError(f"invalid box variable {name!r}")
            if name in seen:
                raise ValueError(f"variable {name!r} appears twice in box")
            seen.add(name)
            bounds = rng.split(":")
            if len(bounds) not in (1, 2):
                raise ValueError(f"invalid range {rng!r}")
            try:
                lo = parse(bounds[0])
                hi = parse(bounds[-1])
            except ParseError as exc:
                raise ValueError(f"invalid bound in {part!r}: {exc}") from None
            items.append(Interval(name, lo, hi))
        return cls(tuple(items), tuple(as_expr(c) if not isinstance(c, str) else parse(c) for c in constraints))

    @classmethod
    def of(cls, constraints: Sequence = (), **ranges) -> "Box":
        items = []
        for name, rng in ranges.items():
            if isinstance(rng, (tuple, list)):
                lo, hi = rng
            else:
                lo = hi = rng
            items.append(Interval(name, as_expr(lo), as_expr(hi)))
        return cls(tuple(items), tuple(as_expr(c) for c in constraints))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(i.name for i in self.intervals)

    def extend(self, other: "Box") -> "Box":
        mine = set(self.names)
        return Box(self.intervals + tuple(i for i in other.intervals if i.name not in mine), self.constraints + other.constraints)

    def bounds_at(self, name: str, point: Mapping[str, float]) -> Tuple[float, float]:
        for iv in self.intervals:
            if iv.name == name:
                return float(eval_numeric(iv.lo, point)), float(eval_numeric(iv.hi, point))
        raise KeyError(name)

    def sample(self, rng: np.random.Generator, max_tries: int = 1000) -> Dict[str, float]:
        for _ in range(max_tries):
            point: Dict[str, float] = {}
            for iv in self.intervals:
                lo = float(eval_numeric(iv.lo, point))
                hi = float(eval_numeric(iv.hi, point))
                if hi < lo:
                    raise ValueError(f"empty range for {iv.name}: [{lo}, {hi}]")
                point[iv.name] = _draw(rng, lo, hi)
            if all(float(eval_numeric(c, point)) > 0 for c in self.constraints):
                return point
        raise SamplingError("box constraints rejected every draw")

    def contains(self, point: Mapping[str, float]) -> bool:
        for iv in self.intervals:
            lo = float(eval_numeric(iv.lo, point))
            hi = float(eval_numeric(iv.hi, point))
            if not lo <= point[iv.name] <= hi:
                return False
        return all(float(eval_numeric(c, point)) > 0 for c in self.constraints)


def _split_top(text: str) -> List[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def _draw(rng: np.random.Generator, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    u = rng.random()
    if lo > 0:
        return float(math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo))))
    if hi < 0:
        return -float(math.exp(math.log(-hi) + u * (math.log(-lo) - math.log(-hi))))
    return lo + u * (hi - lo)


def sample_points(box: Box, n: int, seed: int = DEFAULT_SEED) -> List[Dict[str, float]]:
    """Point ``i`` depends only on ``(seed, i)``, never on evaluation order."""
    return [box.sample(np.random.default_rng([seed, i])) for i in range(n)]


# -- zero testing --------------------------------------------------------

PROVED_ZERO = "ProvedZero"
PROBABLY_ZERO = "ProbablyZero"
NON_ZERO = "NonZero"


@dataclass
class ZeroVerdict:
    status: str
    witness: Optional[Dict[str, object]] = None
    points: int = 0
    precision: Optional[int] = None
    tolerance: Optional[float] = None
    max_residual: float = 0.0
    domain_failures: int = 0

    @property
    def ok(self) -> bool:
        return self.status != NON_ZERO

    def __bool__(self) -> bool:  # pragma: no cover - avoid accidental truthiness
        raise TypeError("use ZeroVerdict.ok or .status")


def equals_zero(
    e,
    strategy: str = "auto",
    box: Optional[Union[Box, str]] = None,
    *,
    n: int = 64,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-25,
    precision: Precision = EXTENDED,
    assume=None,
    fixed: Optional[Mapping[str, object]] = None,
) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically.

    ``symbolic``: ProvedZero iff :func:`simplify` returns the literal zero.
    ``numeric``: evaluate at ``n`` seeded points of ``box``; ProbablyZero iff
    every ``|value| <= tol * (1 + m)`` where ``m`` is the largest magnitude of
    the top-level summands at that point.  ``auto`` tries symbolic first.
    A symbolic failure without a numeric witness is reported as ProbablyZero,
    because NonZero must always carry a witness.
    """
    from .canonical import simplify

    e = as_expr(e)
    if isinstance(box, str):
        box = Box.parse(box)
    if fixed:
        from .nodes import substitute

        e = substitute(e, {k: as_expr(v) if not isinstance(v, float) else as_expr(v) for k, v in fixed.items()})
    if strategy not in ("symbolic", "numeric", "auto"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy in ("symbolic", "auto"):
        s = simplify(e, assume)
        if isinstance(s, Const) and s.value == 0:
            return ZeroVerdict(PROVED_ZERO, points=0, precision=None)
        if isinstance(s, Const):
            return ZeroVerdict(
                NON_ZERO,
                witness={"point": {}, "value": float(s.value)},
                points=1,
                max_residual=abs(float(s.value)),
            )
        if box is None:
            names = sorted(free_symbols(s) - set(CONSTANTS))
            box = Box.of(**{name: (Fraction(1, 2), Fraction(3, 2)) for name in names})
        e = s if strategy == "symbolic" else e
    if box is None:
        raise ValueError("numeric zero testing needs a sampling box")
    missing = free_symbols(e) - set(box.names) - set(CONSTANTS)
    if missing:
        raise ValueError(f"no sampling range for {sorted(missing)}")
    return _numeric_zero(e, box, n, seed, tol, precision)


def _numeric_zero(e: Expr, box: Box, n: int, seed: int, tol: float, precision: Precision) -> ZeroVerdict:
    dps = _dps(precision) or 16
    terms = e.terms if isinstance(e, Add) else (e,)
    worst = 0.0
    failures = 0
    tested = 0
    for i, point in enumerate(sample_points(box, n, seed)):
        try:
            with mpmath.workdps(dps):
                value = _evaluate(e, point, _MpOps)
                if len(terms) > 1:
                    scale = max(abs(_evaluate(t, point, _MpOps)) for t in terms)
                else:
                    scale = abs(value)
                bound = tol * (1 + scale)
                tested += 1
                mag = abs(value)
                ratio = float(mag / (1 + scale))
                worst = max(worst, ratio)
                if mag > bound:
                    return ZeroVerdict(
                        NON_ZERO,
                        witness={"point": dict(point), "value": float(value), "index": i},
                        points=tested,
                        precision=dps,
                        tolerance=tol,
                        max_residual=ratio,
                        domain_failures=failures,
                    )
        except (DomainError, ZeroDivisionError):
            failures += 1
    if tested == 0:
        raise SamplingError(f"all {n} sampled points hit domain errors")
    return ZeroVerdict(PROBABLY_ZERO, points=tested, precision=dps, tolerance=tol, max_residual=worst, domain_failures=failures)
