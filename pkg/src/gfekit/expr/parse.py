"""Pratt parser for the kernel's expression grammar.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = ("-" | "+") unary | power ;
    power    = primary [ "^" unary ] ;            (* right associative *)
    primary  = number | name | call | "(" expr ")" ;
    call     = fname "(" expr ")"
             | uname [ "[" name { "," name } "]" ] "(" name { "," name } ")" ;
    number   = digit { digit } [ "." { digit } ] [ ("e" | "E") ["+" | "-"] digit { digit } ] ;
    name     = letter { letter | digit | "_" } ;

``fname`` is one of sin, cos, tan, arctan, sqrt, exp.  ``uname`` is a name
declared through the ``functions`` argument of :func:`parse` (undefined
functions such as ``Q(t, x)``); the bracket suffix lists derivative variables.
Exponents must fold to rational constants.  Multiplication is always explicit:
``2x`` and ``x y`` are syntax errors.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional

from .nodes import (
    FUNCTIONS,
    Const,
    Expr,
    Func,
    Sym,
    add,
    call,
    mul,
    neg,
    power,
    sqrt,
)


class ParseError(ValueError):
    """Syntax error carrying the byte offset and the set of expected tokens."""

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ""
        if self.expected:
            exp = "; expected one of " + ", ".join(sorted(self.expected))
        super().__init__(f"{message} at byte {offset}{exp}")


class UnknownFunctionError(ParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    text: str
    offset: int


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),\[\]]))"
)

_AFTER_OPERAND = frozenset({"+", "-", "*", "/", "^", ")", ",", "<end>"})
_OPERAND_START = frozenset({"<number>", "<name>", "(", "-", "+"})


def tokenize(text: str) -> List[Token]:
    raw = text.encode("utf-8")
    tokens: List[Token] = []
    pos = 0
    # byte offsets: map character index -> byte index lazily
    def boff(i: int) -> int:
        return len(text[:i].encode("utf-8"))

    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            stripped = len(rest) - len(rest.lstrip())
            if pos + stripped >= len(text):
                tokens.append(Token("end", "", len(raw)))
                return tokens
            raise ParseError(
                f"unexpected character {text[pos + stripped]!r}",
                boff(pos + stripped),
                _OPERAND_START | _AFTER_OPERAND,
            )
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), boff(m.start(kind))))
        pos = m.end()


_BINARY = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25


class _Parser:
    def __init__(self, text: str, functions: FrozenSet[str]):
        self.tokens = tokenize(text)
        self.i = 0
        self.functions = functions

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.kind == "end" or t.text != text:
            raise ParseError(f"unexpected {_describe(t)}", t.offset, {text})
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr(0)
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {_describe(self.tok)}", self.tok.offset, _AFTER_OPERAND)
        return e

    def expr(self, rbp: int) -> Expr:
        left = self.nud(self.advance())
        while True:
            t = self.tok
            if t.kind == "op" and t.text in _BINARY:
                lbp = _BINARY[t.text]
                if lbp <= rbp:
                    break
                self.advance()
                left = self.led(t, left)
            elif t.kind in ("num", "name") or (t.kind == "op" and t.text == "("):
                raise ParseError(
                    f"implicit multiplication is not allowed before {_describe(t)}",
                    t.offset,
                    _AFTER_OPERAND,
                )
            else:
                break
        return left

    def nud(self, t: Token) -> Expr:
        if t.kind == "num":
            return Const(Fraction(t.text))
        if t.kind == "name":
            if self.tok.kind == "op" and self.tok.text in ("(", "["):
                return self.application(t)
            return Sym(t.text)
        if t.kind == "op":
            if t.text == "(":
                e = self.expr(0)
                self.expect(")")
                return e
            if t.text == "-":
                return neg(self.expr(_UNARY_BP))
            if t.text == "+":
                return self.expr(_UNARY_BP)
        raise ParseError(f"unexpected {_describe(t)}", t.offset, _OPERAND_START)

    def led(self, t: Token, left: Expr) -> Expr:
        op = t.text
        if op == "^":
            start = self.tok.offset
            right = self.expr(_BINARY["^"] - 1)
            if not isinstance(right, Const):
                raise ParseError("exponent must be a rational constant", start, {"<number>"})
            try:
                return power(left, right.value)
            except ZeroDivisionError:
                raise ParseError("zero raised to a negative power", start) from None
        right = self.expr(_BINARY[op])
        if op == "+":
            return add(left, right)
        if op == "-":
            return add(left, neg(right))
        if op == "*":
            return mul(left, right)
        try:
            return mul(left, power(right, -1))
        except ZeroDivisionError:
            raise ParseError("division by zero", t.offset) from None

    def application(self, name: Token) -> Expr:
        fname = name.text
        if fname in FUNCTIONS or fname == "sqrt":
            self.expect("(")
            arg = self.expr(0)
            self.expect(")")
            return sqrt(arg) if fname == "sqrt" else call(fname, arg)
        if fname not in self.functions:
            raise UnknownFunctionError(
                f"unknown function {fname!r}",
                name.offset,
                set(FUNCTIONS) | {"sqrt"} | set(self.functions),
            )
        derivs: List[str] = []
        if self.tok.text == "[":
            self.advance()
            derivs.append(self.name())
            while self.tok.text == ",":
                self.advance()
                derivs.append(self.name())
            self.expect("]")
        self.expect("(")
        args = [Sym(self.name())]
        while self.tok.text == ",":
            self.advance()
            args.append(Sym(self.name()))
        self.expect(")")
        names = {a.name for a in args}
        for d in derivs:
            if d not in names:
                raise ParseError(f"derivative variable {d!r} is not an argument of {fname}", name.offset)
        return Func(fname, tuple(args), tuple(derivs))

    def name(self) -> str:
        t = self.tok
        if t.kind != "name":
            raise ParseError(f"unexpected {_describe(t)}", t.offset, {"<name>"})
        self.advance()
        return t.text


def _describe(t: Token) -> str:
    if t.kind == "end":
        return "end of input"
    return f"{t.text!r}"


def parse(text: str, functions: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    ``functions`` declares names of undefined functions (e.g. ``{"Q", "F"}``).
    """
    return _Parser(text, frozenset(functions or ())).parse()
