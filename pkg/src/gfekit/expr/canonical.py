"""Canonical forms.

:func:`simplify` expands an expression into a Laurent polynomial whose
"atoms" are symbols, undefined-function applications, elementary-function
calls with canonical arguments, and rational powers of canonical compound
bases (primitive sums, or monomials whose sign is unknown).  Monomials are
ordered lexicographically; the constant term comes last.  If compound bases
occur with negative exponents the result is put over a common denominator, so
rational and radical cancellations become polynomial cancellations.

Fixed rewrite set (nothing else is attempted):

* ``cos(u)^2 -> 1 - sin(u)^2`` for every even power of a cosine;
* ``sin(3v) -> (3 - 4 sin(v)^2) sin(v)`` and ``cos(3v) -> (1 - 4 sin(v)^2) cos(v)``
  when every coefficient of the argument is an integer multiple of 3;
* parity: ``sin``, ``tan``, ``arctan`` are odd and ``cos`` is even, so call
  arguments always have a positive leading coefficient;
* ``sqrt(a^2) -> |a|`` only when the sign of ``a`` is declared in an
  :class:`Assumptions` context, and ``sqrt(1 - sin(u)^2) -> cos(u)`` only when
  ``cos(u)`` is declared positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .errors import DomainError
from .nodes import (
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
    as_expr,
    cos,
    mul,
    power,
    rational_root,
)

Mono = Tuple[Tuple[Expr, Fraction], ...]
Poly = Dict[Mono, Fraction]


@dataclass(frozen=True)
class Assumptions:
    """Sign declarations used by radical simplification.

    ``positive``/``negative`` hold symbol names or whole expressions (for
    instance ``cos(th)``).
    """

    positive: FrozenSet = field(default_factory=frozenset)
    negative: FrozenSet = field(default_factory=frozenset)

    @classmethod
    def of(cls, positive: Iterable = (), negative: Iterable = ()) -> "Assumptions":
        return cls(frozenset(_norm(p) for p in positive), frozenset(_norm(n) for n in negative))

    def sign(self, atom: Expr) -> int:
        key = atom.name if isinstance(atom, Sym) else atom
        if key in self.positive:
            return 1
        if key in self.negative:
            return -1
        if isinstance(atom, Const):
            return (atom.value > 0) - (atom.value < 0)
        if isinstance(atom, Call) and atom.fn == "exp":
            return 1
        return 0


def _norm(x):
    if isinstance(x, Sym):
        return x.name
    if isinstance(x, str):
        return x
    return as_expr(x)


NO_ASSUMPTIONS = Assumptions()


def _is_compound(atom: Expr) -> bool:
    return isinstance(atom, (Add, Mul, Pow))


def _mono_key(m: Mono):
    return (0 if m else 1, tuple((a.order_key(), -e) for a, e in m))


class _Canon:
    def __init__(self, ctx: Assumptions):
        self.ctx = ctx
        self.memo: Dict[int, Poly] = {}
        self.keep: List[Expr] = []  # keeps ids stable for the memo

    # -- polynomial arithmetic -------------------------------------------
    def expand(self, e: Expr) -> Poly:
        hit = self.memo.get(id(e))
        if hit is not None:
            return hit
        out = self._expand(e)
        self.memo[id(e)] = out
        self.keep.append(e)
        return out

    def _expand(self, e: Expr) -> Poly:
        if isinstance(e, Const):
            return {(): e.value} if e.value != 0 else {}
        if isinstance(e, (Sym, Func)):
            return {((e, Fraction(1)),): Fraction(1)}
        if isinstance(e, Add):
            out: Poly = {}
            for t in e.terms:
                _acc(out, self.expand(t))
            return out
        if isinstance(e, Mul):
            out = {(): Fraction(1)}
            for f in e.factors:
                out = self.pmul(out, self.expand(f))
                if not out:
                    return out
            return out
        if isinstance(e, Pow):
            return self.ppow(self.expand(e.base), e.exp, e)
        if isinstance(e, Call):
            return self.pcall(e.fn, self.expand(e.arg))
        raise TypeError(type(e).__name__)

    def pmul(self, a: Poly, b: Poly) -> Poly:
        if not a or not b:
            return {}
        if len(a) == 1 and () in a:
            c = a[()]
            return {m: c * v for m, v in b.items()} if c != 1 else dict(b)
        if len(b) == 1 and () in b:
            c = b[()]
            return {m: c * v for m, v in a.items()} if c != 1 else dict(a)
        out: Poly = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                merged = _merge(ma, mb)
                coeff = ca * cb
                if self._clean(merged):
                    m = tuple(sorted(merged.items(), key=lambda it: it[0].order_key()))
                    v = out.get(m, 0) + coeff
                    if v:
                        out[m] = v
                    else:
                        out.pop(m, None)
                else:
                    _acc(out, self.normalize(merged, coeff))
        return out

    def _clean(self, merged: Dict[Expr, Fraction]) -> bool:
        for atom, e in list(merged.items()):
            if e == 0:
                del merged[atom]
                continue
            if isinstance(atom, Const):
                if not (0 < e < 1):
                    return False
            elif _is_compound(atom):
                if e >= 1 or (e.denominator == 1 and not isinstance(atom, Add)):
                    return False
            elif isinstance(atom, Call) and atom.fn == "cos":
                if e.denominator == 1 and e >= 2:
                    return False
        return True

    def normalize(self, items: Dict[Expr, Fraction], coeff: Fraction) -> Poly:
        """Bring a merged monomial into canonical shape (may expand)."""
        result: Poly = {(): coeff}
        plain: Dict[Expr, Fraction] = {}
        for atom, e in items.items():
            if e == 0:
                continue
            if isinstance(atom, Const):
                n = floor(e)
                f = e - n
                c = atom.value ** n
                if f:
                    r = rational_root(atom.value, f)
                    if r is not None:
                        c *= r
                    else:
                        plain[atom] = plain.get(atom, 0) + f
                result = {m: v * c for m, v in result.items()}
            elif _is_compound(atom) and e.denominator == 1 and not isinstance(atom, Add):
                (m, c), = self.expand(atom).items()
                result = self.pmul(result, self.mono_pow(m, c, e))
            elif _is_compound(atom) and e >= 1:
                n = floor(e)
                f = e - n
                result = self.pmul(result, self.ipow(self.expand(atom), n))
                if f:
                    plain[atom] = plain.get(atom, 0) + f
            elif isinstance(atom, Call) and atom.fn == "cos" and e.denominator == 1 and e >= 2:
                k, r = divmod(int(e), 2)
                one_minus_s2 = {(): Fraction(1)}
                s2 = self.pcall("sin", self.expand(atom.arg))
                s2 = self.pmul(s2, s2)
                _acc(one_minus_s2, {m: -v for m, v in s2.items()})
                result = self.pmul(result, self.ipow(one_minus_s2, k))
                if r:
                    plain[atom] = plain.get(atom, 0) + 1
            else:
                plain[atom] = plain.get(atom, 0) + e
        plain = {a: e for a, e in plain.items() if e != 0}
        if plain:
            m = tuple(sorted(plain.items(), key=lambda it: it[0].order_key()))
            result = self.pmul(result, {m: Fraction(1)}) if self._clean(dict(plain)) else self._slow(result, plain)
        return result

    def _slow(self, result: Poly, plain: Dict[Expr, Fraction]) -> Poly:
        # plain atoms still need fixups (e.g. Const atoms that merged to >= 1)
        return self.pmul(result, self.normalize(plain, Fraction(1)))

    def ipow(self, p: Poly, n: int) -> Poly:
        out: Poly = {(): Fraction(1)}
        base = p
        while n:
            if n & 1:
                out = self.pmul(out, base)
            n >>= 1
            if n:
                base = self.pmul(base, base)
        return out

    # -- powers ----------------------------------------------------------
    def ppow(self, p: Poly, exp: Fraction, origin: Optional[Expr] = None) -> Poly:
        if not p:
            if exp > 0:
                return {}
            raise DomainError("zero raised to a non-positive power", origin)
        if exp.denominator == 1 and exp >= 0:
            return self.ipow(p, int(exp))
        if len(p) == 1:
            (m, c), = p.items()
            return self.mono_pow(m, c, exp)
        return self.sum_pow(p, exp)

    def mono_pow(self, m: Mono, c: Fraction, exp: Fraction) -> Poly:
        if exp.denominator == 1:
            items = {a: e * exp for a, e in m}
            return self.normalize(items, c ** int(exp))
        dist: Dict[Expr, Fraction] = {}
        rest: List[Tuple[Expr, Fraction]] = []
        sign_flip = 0
        for a, e in m:
            s = self.ctx.sign(a)
            if s > 0 or e.numerator % 2 == 1:
                dist[a] = dist.get(a, 0) + e * exp
            elif s < 0 and (e * exp).denominator == 1:
                dist[a] = dist.get(a, 0) + e * exp
                sign_flip += int(e * exp)
            else:
                rest.append((a, e))
        coeff = Fraction(1)
        out_coeff_atoms: Dict[Expr, Fraction] = {}
        if c > 0 or (c < 0 and exp.denominator % 2 == 1):
            mag = rational_root(abs(c), exp)
            if mag is not None:
                coeff = mag
            else:
                outer, inner = _split_power(abs(c), exp.denominator)
                coeff = outer ** exp.numerator
                out_coeff_atoms[Const(inner)] = exp
            if c < 0 and exp.numerator % 2 == 1:
                coeff = -coeff
            c_rest = Fraction(1)
        else:
            c_rest = c
        if sign_flip % 2:
            coeff = -coeff
        items = dict(dist)
        for a, e in out_coeff_atoms.items():
            items[a] = items.get(a, 0) + e
        if rest or c_rest != 1:
            if c_rest == 1 and len(rest) == 1 and rest[0][1] == 1:
                atom = rest[0][0]
                items[atom] = items.get(atom, 0) + exp
            else:
                base = self.to_expr({tuple(sorted(rest, key=lambda it: it[0].order_key())): c_rest})
                items[base] = items.get(base, 0) + exp
        return self.normalize(items, coeff)

    def sum_pow(self, p: Poly, exp: Fraction) -> Poly:
        # pythagorean radical: sqrt(1 - sin(u)^2)^k -> cos(u)^k when cos(u) > 0
        if exp.denominator == 2:
            u = _one_minus_sin_sq(p)
            if u is not None and self.ctx.sign(cos(u)) > 0:
                return self.normalize({Call("cos", u): exp * 2}, Fraction(1))
        monos = sorted(p.items(), key=lambda it: _mono_key(it[0]))
        lead = monos[0][1]
        g = _content(c for _, c in monos)
        # monomial content (Laurent): min exponent over all monomials, absence = 0
        atoms = set()
        for m, _ in monos:
            atoms.update(a for a, _ in m)
        content: Dict[Expr, Fraction] = {}
        for a in atoms:
            lo = min(dict(m).get(a, Fraction(0)) for m, _ in monos)
            if lo != 0:
                content[a] = lo
        integer = exp.denominator == 1
        factor_c = g * (1 if lead > 0 or not integer else -1)
        if not integer:
            # only pull out atoms whose power may be distributed safely
            content = {
                a: e
                for a, e in content.items()
                if self.ctx.sign(a) > 0 or (e.numerator % 2 == 1 and e.denominator % 2 == 1 and exp.denominator % 2 == 1)
            }
        scaled: Poly = {}
        for m, c in monos:
            items = dict(m)
            for a, e in content.items():
                items[a] = items[a] - e if a in items else -e
            items = {a: e for a, e in items.items() if e != 0}
            mm = tuple(sorted(items.items(), key=lambda it: it[0].order_key()))
            scaled[mm] = c / factor_c
        out: Poly = {(): Fraction(1)}
        if factor_c != 1:
            out = self.mono_pow((), factor_c, exp)
        if content:
            cm = tuple(sorted(content.items(), key=lambda it: it[0].order_key()))
            out = self.pmul(out, self.mono_pow(cm, Fraction(1), exp))
        if len(scaled) == 1:
            (m, c), = scaled.items()
            return self.pmul(out, self.mono_pow(m, c, exp))
        base = self.to_expr(scaled)
        n = floor(exp)
        f = exp - n
        if n >= 1:
            out = self.pmul(out, self.ipow(scaled, n))
            exp = f
        if exp:
            out = self.pmul(out, {((base, exp),): Fraction(1)})
        return out

    # -- elementary functions ------------------------------------------
    def pcall(self, fn: str, arg: Poly) -> Poly:
        if not arg:
            return {(): Fraction(1)} if fn in ("cos", "exp") else {}
        sign = 1
        if fn != "exp":
            lead = sorted(arg.items(), key=lambda it: _mono_key(it[0]))[0][1]
            if lead < 0:
                arg = {m: -c for m, c in arg.items()}
                if fn != "cos":
                    sign = -1
        if fn in ("sin", "cos") and all(c.denominator == 1 and c.numerator % 3 == 0 for c in arg.values()):
            v = {m: c / 3 for m, c in arg.items()}
            s = self.pcall("sin", v)
            s2 = self.pmul(s, s)
            if fn == "sin":
                poly = {(): Fraction(3)}
                _acc(poly, {m: -4 * c for m, c in s2.items()})
                out = self.pmul(poly, s)
            else:
                poly = {(): Fraction(1)}
                _acc(poly, {m: -4 * c for m, c in s2.items()})
                out = self.pmul(poly, self.pcall("cos", v))
            return {m: sign * c for m, c in out.items()}
        atom = Call(fn, self.to_expr(arg))
        return {((atom, Fraction(1)),): Fraction(sign)}

    # -- output ----------------------------------------------------------
    def to_expr(self, p: Poly) -> Expr:
        if not p:
            return ZERO
        terms = []
        for m, c in sorted(p.items(), key=lambda it: _mono_key(it[0])):
            factors = [power(a, e) if e != 1 else a for a, e in m]
            terms.append(mul(Const(c), *factors))
        return add(*terms)

    def together(self, p: Poly) -> Tuple[Poly, Dict[Expr, Fraction]]:
        den: Dict[Expr, Fraction] = {}
        for _ in range(16):
            shift: Dict[Expr, Fraction] = {}
            for m in p:
                for a, e in m:
                    if _is_compound(a) and e < 0:
                        shift[a] = min(shift.get(a, Fraction(0)), e)
            if not shift:
                break
            q: Poly = {}
            for m, c in p.items():
                items = dict(m)
                for a, e in shift.items():
                    items[a] = items.get(a, 0) - e
                _acc(q, self.normalize(items, c))
            p = q
            for a, e in shift.items():
                den[a] = den.get(a, 0) + e
        for a in list(den):
            if not p or not isinstance(a, Add):
                continue
            b = self.expand(a)
            while den[a] <= -1:
                q = _divide(p, b)
                if q is None:
                    break
                p = q
                den[a] += 1
        if p and den:
            # common positive fractional factors move back to the denominator
            for a in list(den):
                lo = min(dict(m).get(a, Fraction(0)) for m in p)
                if lo > 0:
                    p = {tuple((b, e - lo if b == a else e) for b, e in m if not (b == a and e == lo)): c for m, c in p.items()}
                    den[a] += lo
        den = {a: e for a, e in den.items() if e != 0}
        return p, den


def _merge(ma: Mono, mb: Mono) -> Dict[Expr, Fraction]:
    out = dict(ma)
    for a, e in mb:
        out[a] = out.get(a, 0) + e
    return out


def _acc(out: Poly, p: Poly) -> None:
    for m, c in p.items():
        v = out.get(m, 0) + c
        if v:
            out[m] = v
        else:
            out.pop(m, None)


def _content(coeffs) -> Fraction:
    num = 0
    den = 1
    for c in coeffs:
        num = gcd(num, c.numerator)
        den = den * c.denominator // gcd(den, c.denominator)
    return Fraction(num, den)


def _strip(p: Poly) -> Tuple[Poly, Dict[Expr, Fraction]]:
    atoms = {a for m in p for a, _ in m}
    lo = {a: min(dict(m).get(a, Fraction(0)) for m in p) for a in atoms}
    lo = {a: e for a, e in lo.items() if e}
    out: Poly = {}
    for m, c in p.items():
        items = dict(m)
        for a, e in lo.items():
            items[a] = items.get(a, 0) - e
        out[tuple((a, e) for a, e in m_sorted(items) if e)] = c
    return out, lo


def m_sorted(items: Dict[Expr, Fraction]):
    return sorted(items.items(), key=lambda it: it[0].order_key())


def _divide(n: Poly, d: Poly, max_steps: int = 20000) -> Optional[Poly]:
    """Exact division ``n / d`` of Laurent polynomials, or ``None``.

    Plain multivariate division under a lex order.  Only monomial
    multiplication is needed, so atoms are treated as free variables.
    """
    n, ln = _strip(n)
    d, ld = _strip(d)
    atoms = sorted({a for m in n for a, _ in m} | {a for m in d for a, _ in m}, key=Expr.order_key)

    def vec(m: Mono):
        dm = dict(m)
        return tuple(dm.get(a, Fraction(0)) for a in atoms)

    lt_d = max(d, key=vec)
    vd = vec(lt_d)
    cd = d[lt_d]
    rem = dict(n)
    quot: Poly = {}
    steps = 0
    while rem:
        steps += 1
        if steps > max_steps:
            return None
        lt = max(rem, key=vec)
        diff = [x - y for x, y in zip(vec(lt), vd)]
        if any(x < 0 for x in diff):
            return None
        qm = tuple((a, e) for a, e in zip(atoms, diff) if e)
        qc = rem[lt] / cd
        quot[qm] = quot.get(qm, 0) + qc
        for m, c in d.items():
            dm = dict(m)
            prod = {a: dm.get(a, Fraction(0)) + e for a, e in zip(atoms, diff)}
            pm = tuple((a, e) for a, e in zip(atoms, (prod[a] for a in atoms)) if e)
            v = rem.get(pm, 0) - qc * c
            if v:
                rem[pm] = v
            else:
                rem.pop(pm, None)
    shift = dict(ln)
    for a, e in ld.items():
        shift[a] = shift.get(a, 0) - e
    out: Poly = {}
    for m, c in quot.items():
        items = dict(m)
        for a, e in shift.items():
            items[a] = items.get(a, 0) + e
        out[tuple((a, e) for a, e in m_sorted(items) if e)] = c
    return out


_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % d for d in range(2, int(p ** 0.5) + 1))]


def _split_power(v: Fraction, q: int) -> Tuple[Fraction, Fraction]:
    """Write ``v = outer**q * inner`` pulling out small-prime q-th powers."""
    def split(n: int) -> Tuple[int, int]:
        outer = 1
        for p in _SMALL_PRIMES:
            pq = p ** q
            if pq > n:
                break
            while n % pq == 0:
                n //= pq
                outer *= p
        return outer, n

    on, inn = split(v.numerator)
    od, ind = split(v.denominator)
    # keep the radicand integral: 1/d^(1/q) = d^((q-1)/q) / d
    return Fraction(on, od * ind), Fraction(inn * ind ** (q - 1))


def _one_minus_sin_sq(p: Poly):
    if len(p) != 2 or p.get(()) != 1:
        return None
    for m, c in p.items():
        if m == ():
            continue
        if c == -1 and len(m) == 1 and m[0][1] == 2:
            a = m[0][0]
            if isinstance(a, Call) and a.fn == "sin":
                return a.arg
    return None


_CACHE: Dict[Tuple[Expr, Assumptions], Expr] = {}


def simplify(e, assume: Optional[Assumptions] = None) -> Expr:
    """Return the canonical form of ``e`` (idempotent, deterministic)."""
    e = as_expr(e)
    ctx = assume or NO_ASSUMPTIONS
    key = (e, ctx)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    c = _Canon(ctx)
    p = c.expand(e)
    p, den = c.together(p)
    out = c.to_expr(p)
    if den and p:
        out = mul(out, *(power(a, x) for a, x in sorted(den.items(), key=lambda it: it[0].order_key())))
    if len(_CACHE) > 50_000:
        _CACHE.clear()
    _CACHE[key] = out
    return out


def expand_poly(e: Expr, assume: Optional[Assumptions] = None) -> Poly:
    """Expose the internal monomial dictionary (used by tests and tooling)."""
    c = _Canon(assume or NO_ASSUMPTIONS)
    return c.expand(as_expr(e))


def is_zero(e: Expr, assume: Optional[Assumptions] = None) -> bool:
    return simplify(e, assume) == ZERO
