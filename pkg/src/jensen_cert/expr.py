"""Arithmetic formulas over named variables.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = primary [ "^" unary ] ;            (* right-associative *)
    primary = number | name | func "(" expr ")" | "(" expr ")" ;
    func    = "sqrt" | "exp" | "ln" ;
    number  = digits [ "." [ digits ] ] [ exponent ] | "." digits [ exponent ] ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)`` and
``2^-1`` is allowed.  There is no implicit multiplication: ``xy`` is a single
(unknown) name, not ``x*y``.

Parsed trees are immutable.  ``compile_expr`` turns a tree into a
:class:`~jensen_cert.autodiff.ScalarFn` that evaluates over floats, numpy
arrays and hyper-dual numbers through the same code.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import autodiff as ad
from .errors import DomainError, ParseError

FUNCTIONS = ("sqrt", "exp", "ln")
INTEGER_EXPONENT_TOL = 1e-12


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    index: int
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    arg: "Node"
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"
    pos: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Func:
    name: str  # one of FUNCTIONS
    arg: "Node"
    pos: int = field(default=-1, compare=False, repr=False)


Node = (Num, Var, Neg, BinOp, Func)

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text, variables, params):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = {name: k for k, name in enumerate(variables)}
        self.params = dict(params or {})

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok):
        raise ParseError(message, _byte_offset(self.text, tok[2]))

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] == "end":
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            self.error(f"expected {value!r}, found {what}", tok)
        return self.advance()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.error(f"unexpected {tok[1]!r}", tok)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()
            node = BinOp(op[1], node, self.term(), pos=op[2])
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()
            node = BinOp(op[1], node, self.unary(), pos=op[2])
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary(), pos=tok[2])
        return self.power()

    def power(self):
        base = self.primary()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary(), pos=tok[2])
        return base

    def primary(self):
        tok = self.advance()
        kind, value, pos = tok
        if kind == "num":
            return Num(float(value), pos=pos)
        if kind == "name":
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(value, arg, pos=pos)
            if value in self.variables:
                return Var(value, self.variables[value], pos=pos)
            if value in self.params:
                c = float(self.params[value])
                return Neg(Num(-c, pos=pos), pos=pos) if c < 0 else Num(c, pos=pos)
            self.error(f"unknown identifier {value!r}", tok)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected {value!r}", tok)


def parse(text: str, variables: Sequence[str], params: Optional[Mapping[str, float]] = None):
    """Parse ``text`` into an expression tree.

    ``variables`` fixes the order of the function's arguments (and so the
    Hessian axes).  Names in ``params`` are replaced by their numeric value.
    """
    if not text or not text.strip():
        raise ParseError("empty input", 0)
    variables = list(variables)
    for name in variables:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name) or name in FUNCTIONS:
            raise ParseError(f"invalid variable name {name!r}")
    if len(set(variables)) != len(variables):
        raise ParseError("duplicate variable names")
    return _Parser(text, variables, params).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def to_text(node) -> str:
    """Render a tree as formula text that parses back to the same tree."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Func):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return f"-{inner}" if _prec(node.arg) >= _NEG_PREC else f"-({inner})"
    p = _prec(node)
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= _POW_PREC:
            left = f"({left})"
        if _prec(node.right) < _NEG_PREC:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def variables_used(node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Func)):
        return variables_used(node.arg)
    return variables_used(node.left) | variables_used(node.right)


def _divide(a, b):
    if np.any(np.asarray(ad.real_part(b)) == 0):
        raise DomainError("division by zero")
    return a / b


_FUNCS = {"sqrt": ad.sqrt, "exp": ad.exp, "ln": ad.log}


def _compile(node):
    """Build a closure ``fn(args) -> value`` for ``node``."""

    def located(fn, n):
        def run(args):
            try:
                return fn(args)
            except DomainError as err:
                if err.offset is not None:
                    raise
                frag = to_text(n)
                raise DomainError(err.base_message, offset=n.pos if n.pos >= 0 else None, expr=frag) from None
        return run

    if isinstance(node, Num):
        v = float(node.value)
        return lambda args: v
    if isinstance(node, Var):
        k = node.index
        return lambda args: args[k]
    if isinstance(node, Neg):
        a = _compile(node.arg)
        return lambda args: -a(args)
    if isinstance(node, Func):
        a = _compile(node.arg)
        g = _FUNCS[node.name]
        return located(lambda args: g(a(args)), node)
    left = _compile(node.left)
    right = _compile(node.right)
    op = node.op
    if op == "+":
        return lambda args: left(args) + right(args)
    if op == "-":
        return lambda args: left(args) - right(args)
    if op == "*":
        return lambda args: left(args) * right(args)
    if op == "/":
        return located(lambda args: _divide(left(args), right(args)), node)
    # "^": constant integer exponents use repeated multiplication (any real base)
    if not variables_used(node.right):
        c = float(right(()))
        if not math.isfinite(c):
            raise DomainError("non-finite exponent", offset=node.pos, expr=to_text(node))
        if abs(c - round(c)) <= INTEGER_EXPONENT_TOL:
            k = int(round(c))
            return located(lambda args: ad.int_power(left(args), k), node)
        return located(lambda args: ad.real_power(left(args), c), node)
    return located(lambda args: ad.exp(right(args) * ad.log(left(args))), node)


def evaluate(node, point):
    """Evaluate a tree at ``point``, a sequence of floats, arrays or HyperDual."""
    fn = _compile(node)
    with np.errstate(all="ignore"):
        return fn(tuple(point))


def compile_expr(node, variables: Sequence[str], name: str = "", source: Optional[str] = None) -> ad.ScalarFn:
    fn = _compile(node)
    variables = tuple(variables)

    def body(*args):
        return fn(args)

    return ad.ScalarFn(len(variables), body, name=name or (source or to_text(node)), variables=variables,
                       source=source or to_text(node))


def function(text: str, variables: Sequence[str], params: Optional[Mapping[str, float]] = None,
             name: str = "") -> ad.ScalarFn:
    """Parse and compile in one step."""
    return compile_expr(parse(text, variables, params), variables, name=name, source=text)
