"""Exact symbolic kernel: nodes, parser, renderer, calculus, canonical forms and numerics."""
from .calculus import cos_as_sqrt, derivative, diff, differentiate
from .canonical import Assumptions, expand_poly, is_zero, simplify
from .errors import DomainError, SamplingError
from .nodes import (
    FUNCTIONS,
    MINUS_ONE,
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
    arctan,
    as_expr,
    call,
    cos,
    count_nodes,
    depth,
    exp,
    free_symbols,
    func,
    mul,
    neg,
    power,
    replace,
    sin,
    sqrt,
    substitute,
    symbols,
    tan,
    walk,
)
from .parse import ParseError, UnknownFunctionError, parse
from .render import render
