"""Expression tree nodes and light-weight smart constructors.

Nodes are immutable and hashable.  The smart constructors (:func:`add`,
:func:`mul`, :func:`power`, :func:`call`) only flatten, fold constants and
drop neutral elements; they never reorder operands.  Full canonicalisation
lives in :mod:`gfekit.expr.canonical`.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

#: Elementary functions understood by the kernel.  ``sqrt`` is accepted by the
#: parser but is stored as a power with exponent 1/2.
FUNCTIONS = ("sin", "cos", "tan", "arctan", "exp")

Number = Union[int, Fraction]


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_hash", "_order")
    kind = "expr"

    def _key(self) -> tuple:
        raise NotImplementedError

    @property
    def children(self) -> Tuple["Expr", ...]:
        return ()

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            h = hash((self.kind,) + self._key())
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr) or self.kind != other.kind:
            return False
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other: object) -> bool:
        return not self == other

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __repr__(self) -> str:
        from .render import render

        return f"Expr({render(self)!r})"

    def __str__(self) -> str:
        from .render import render

        return render(self)

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        return power(self, exponent)

    def order_key(self) -> tuple:
        """Total order used when sorting atoms and monomials."""
        try:
            return self._order
        except AttributeError:
            k = self._order_key()
            object.__setattr__(self, "_order", k)
            return k

    def _order_key(self) -> tuple:
        raise NotImplementedError


class Const(Expr):
    __slots__ = ("value",)
    kind = "const"

    def __init__(self, value: Number):
        object.__setattr__(self, "value", Fraction(value))

    def _key(self):
        return (self.value,)

    def _order_key(self):
        return (0, self.value)


class Sym(Expr):
    __slots__ = ("name",)
    kind = "sym"

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)

    def _order_key(self):
        return (1, self.name)


class Func(Expr):
    """Application of an undefined function, e.g. ``F(y)`` or ``Q[t,x,x](t, x)``.

    ``derivs`` lists the differentiation variables in sorted order, so mixed
    partials commute structurally.
    """

    __slots__ = ("name", "args", "derivs")
    kind = "func"

    def __init__(self, name: str, args: Tuple[Sym, ...], derivs: Tuple[str, ...] = ()):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "derivs", tuple(sorted(derivs)))

    @property
    def children(self):
        return self.args

    def _key(self):
        return (self.name, self.args, self.derivs)

    def _order_key(self):
        return (2, self.name, self.derivs, tuple(a.name for a in self.args))


class Call(Expr):
    __slots__ = ("fn", "arg")
    kind = "call"

    def __init__(self, fn: str, arg: Expr):
        if fn not in FUNCTIONS:
            raise ValueError(f"unsupported function {fn!r}")
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "arg", arg)

    @property
    def children(self):
        return (self.arg,)

    def _key(self):
        return (self.fn, self.arg)

    def _order_key(self):
        return (3, self.fn, self.arg.order_key())


class Pow(Expr):
    __slots__ = ("base", "exp")
    kind = "pow"

    def __init__(self, base: Expr, exp: Number):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", Fraction(exp))

    @property
    def children(self):
        return (self.base,)

    def _key(self):
        return (self.base, self.exp)

    def _order_key(self):
        return (4, self.base.order_key(), self.exp)


class Add(Expr):
    __slots__ = ("terms",)
    kind = "add"

    def __init__(self, terms: Tuple[Expr, ...]):
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def children(self):
        return self.terms

    def _key(self):
        return self.terms

    def _order_key(self):
        return (5, len(self.terms), tuple(t.order_key() for t in self.terms))


class Mul(Expr):
    __slots__ = ("factors",)
    kind = "mul"

    def __init__(self, factors: Tuple[Expr, ...]):
        object.__setattr__(self, "factors", tuple(factors))

    @property
    def children(self):
        return self.factors

    def _key(self):
        return self.factors

    def _order_key(self):
        return (6, len(self.factors), tuple(f.order_key() for f in self.factors))


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)


def as_expr(value) -> Expr:
    """Coerce ints, Fractions, floats and numeric strings to :class:`Const`.

    Floats are converted through their shortest decimal representation, so
    ``0.3`` becomes ``3/10`` rather than the binary approximation.
    """
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, Rational)):
        return Const(Fraction(value))
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("non-finite float cannot become an exact constant")
        return Const(Fraction(repr(value)))
    if isinstance(value, str):
        return Const(Fraction(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def symbols(names: str) -> Tuple[Sym, ...]:
    return tuple(Sym(n) for n in names.replace(",", " ").split())


def add(*args: Expr) -> Expr:
    terms = []
    const = Fraction(0)
    stack = list(args)
    stack.reverse()
    while stack:
        a = as_expr(stack.pop())
        if isinstance(a, Add):
            stack.extend(reversed(a.terms))
        elif isinstance(a, Const):
            const += a.value
        else:
            terms.append(a)
    if const != 0:
        terms.append(Const(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def mul(*args: Expr) -> Expr:
    factors = []
    coeff = Fraction(1)
    stack = list(args)
    stack.reverse()
    while stack:
        a = as_expr(stack.pop())
        if isinstance(a, Mul):
            stack.extend(reversed(a.factors))
        elif isinstance(a, Const):
            coeff *= a.value
        else:
            factors.append(a)
    if coeff == 0:
        return ZERO
    if not factors:
        return Const(coeff)
    if coeff != 1:
        factors.insert(0, Const(coeff))
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def neg(a: Expr) -> Expr:
    return mul(MINUS_ONE, a)


def rational_root(value: Fraction, exp: Fraction):
    """Return ``value**exp`` as a Fraction if it is rational, else ``None``."""
    if exp.denominator == 1:
        if value == 0 and exp < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return value ** int(exp)
    if value < 0:
        if exp.denominator % 2 == 0:
            return None
        r = rational_root(-value, exp)
        return None if r is None else (-r if exp.numerator % 2 else r)
    q = exp.denominator
    num = _int_root(value.numerator, q)
    den = _int_root(value.denominator, q)
    if num is None or den is None:
        return None
    base = Fraction(num, den)
    if base == 0 and exp < 0:
        raise ZeroDivisionError("0 raised to a negative power")
    return base ** exp.numerator


def _int_root(n: int, q: int):
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    # large integers: integer Newton iteration
    x = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    return x if x ** q == n else None


def power(base, exp) -> Expr:
    base = as_expr(base)
    if isinstance(exp, Expr):
        if not isinstance(exp, Const):
            raise ValueError("exponents must be rational constants")
        exp = exp.value
    if isinstance(exp, float):
        exp = Fraction(repr(exp))
    exp = Fraction(exp)
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if isinstance(base, Const):
        r = rational_root(base.value, exp)
        if r is not None:
            return Const(r)
        return Pow(base, exp)
    if isinstance(base, Pow) and exp.denominator == 1:
        return power(base.base, base.exp * exp)
    return Pow(base, exp)


def sqrt(a) -> Expr:
    return power(a, Fraction(1, 2))


_ZERO_AT_ZERO = {"sin", "tan", "arctan"}


def call(fn: str, arg) -> Expr:
    arg = as_expr(arg)
    if isinstance(arg, Const) and arg.value == 0:
        return ZERO if fn in _ZERO_AT_ZERO else ONE
    return Call(fn, arg)


def sin(a):
    return call("sin", a)


def cos(a):
    return call("cos", a)


def tan(a):
    return call("tan", a)


def arctan(a):
    return call("arctan", a)


def exp(a):
    return call("exp", a)


def func(name: str, *args: Sym) -> Func:
    """Apply an undefined function to symbols, e.g. ``func('Q', t, x)``."""
    for a in args:
        if not isinstance(a, Sym):
            raise TypeError("undefined functions may only be applied to symbols")
    return Func(name, tuple(args))


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal visiting every shared node once."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(n.children)


def free_symbols(e: Expr) -> frozenset:
    return frozenset(n.name for n in walk(e) if isinstance(n, Sym))


def rebuild(e: Expr, children: Tuple[Expr, ...]) -> Expr:
    """Reconstruct ``e`` with new children using the smart constructors."""
    if isinstance(e, Add):
        return add(*children)
    if isinstance(e, Mul):
        return mul(*children)
    if isinstance(e, Pow):
        return power(children[0], e.exp)
    if isinstance(e, Call):
        return call(e.fn, children[0])
    return e


Bindings = Mapping[str, object]


def substitute(e: Expr, bindings: Bindings) -> Expr:
    """Replace symbols simultaneously.

    Values may be Exprs or numbers.  Undefined-function applications whose
    arguments are substituted are re-applied to the new arguments only when
    those are symbols; otherwise a ``ValueError`` is raised, since composite
    arguments would need the chain rule to stay meaningful.
    """
    table: Dict[str, Expr] = {k: as_expr(v) for k, v in bindings.items()}
    if not table:
        return e
    memo: Dict[int, Expr] = {}

    def go(n: Expr) -> Expr:
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        if isinstance(n, Sym):
            out = table.get(n.name, n)
        elif isinstance(n, Const):
            out = n
        elif isinstance(n, Func):
            new_args = tuple(table.get(a.name, a) for a in n.args)
            if new_args == n.args:
                out = n
            elif all(isinstance(a, Sym) for a in new_args):
                renames = {a.name: b.name for a, b in zip(n.args, new_args)}
                out = Func(n.name, new_args, tuple(renames.get(d, d) for d in n.derivs))
            else:
                raise ValueError(
                    f"cannot substitute composite arguments into undefined function {n.name}"
                )
        else:
            kids = tuple(go(c) for c in n.children)
            out = n if kids == n.children else rebuild(n, kids)
        memo[id(n)] = out
        return out

    return go(e)


def replace(e: Expr, mapping: Mapping[Expr, Expr]) -> Expr:
    """Replace whole sub-trees (matched structurally) bottom-up."""
    memo: Dict[int, Expr] = {}

    def go(n: Expr) -> Expr:
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        if n in mapping:
            out = as_expr(mapping[n])
        elif n.children and not isinstance(n, Func):
            kids = tuple(go(c) for c in n.children)
            out = n if kids == n.children else rebuild(n, kids)
            if out in mapping:
                out = as_expr(mapping[out])
        else:
            out = n
        memo[id(n)] = out
        return out

    return go(e)


def count_nodes(e: Expr) -> int:
    return sum(1 for _ in walk(e))


def depth(e: Expr) -> int:
    memo: Dict[int, int] = {}

    def go(n):
        if id(n) in memo:
            return memo[id(n)]
        d = 1 + max((go(c) for c in n.children), default=0)
        memo[id(n)] = d
        return d

    return go(e)


def is_number(e: Expr) -> bool:
    return isinstance(e, Const)


def iter_terms(e: Expr) -> Iterable[Expr]:
    return e.terms if isinstance(e, Add) else (e,)
