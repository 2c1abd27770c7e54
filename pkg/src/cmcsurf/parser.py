"""Parser for rational expressions in ``z`` with complex literals.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*``/``/``, which bind tighter than ``+``/``-``; all binary operators are
left associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := atom ('^' ['-'] INT)*
    atom    := NUMBER | NUMBER 'i' | 'i' | 'z' | '(' expr ')'

Complex literals use a suffix ``i``: ``2i``, ``1.5i``, ``1+2i``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import DegreeCap, ExpressionSyntaxError, NonRational
from .rational import RationalMap, degree, is_zero, poly_add, poly_mul, poly_scale

MAX_DEGREE = 64

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i)?|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "z", "op", "end"
    text: str
    pos: int
    value: complex = 0j


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                                        len(text) - len(text[pos:].lstrip()))
        start = m.start(m.lastgroup)
        if m.group("num") is not None:
            v = float(m.group("num"))
            tokens.append(Token("num", m.group(0).strip(), start, complex(0, v) if m.group("imag") else complex(v)))
        elif m.group("name") is not None:
            name = m.group("name")
            if name == "z":
                tokens.append(Token("z", name, start))
            elif name == "i":
                tokens.append(Token("num", name, start, 1j))
            else:
                raise ExpressionSyntaxError(f"unknown name {name!r} (only 'z' and 'i' are allowed)", start)
        else:
            tokens.append(Token("op", m.group("op"), start))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# -- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Literal, Var, Neg, BinOp, Pow]


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.kind != "op" or self.tok.text != text:
            raise ExpressionSyntaxError(f"expected {text!r}", self.tok.pos)
        self.take()

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise ExpressionSyntaxError("empty expression", 0)
        node = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.take()
                sign = -1
            t = self.tok
            if t.kind != "num" or t.value.imag != 0 or not re.fullmatch(r"\d+", t.text):
                raise ExpressionSyntaxError("exponent must be an integer literal", t.pos)
            self.take()
            node = Pow(node, sign * int(t.text))
        return node

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Literal(t.value)
        if t.kind == "z":
            self.take()
            return Var()
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExpressionSyntaxError(f"unexpected {what}", t.pos)


def parse_expression(text: str) -> Node:
    return _Parser(text).parse()


def _check_degree(num, den):
    if max(degree(num), degree(den)) > MAX_DEGREE:
        raise DegreeCap(f"degree exceeds {MAX_DEGREE}")


def _normalize(node: Node):
    """Fold an AST into a (numerator, denominator) coefficient pair."""
    if isinstance(node, Literal):
        return [node.value], [1 + 0j]
    if isinstance(node, Var):
        return [0j, 1 + 0j], [1 + 0j]
    if isinstance(node, Neg):
        n, d = _normalize(node.operand)
        return poly_scale(n, -1), d
    if isinstance(node, Pow):
        n, d = _normalize(node.base)
        k = node.exponent
        if k < 0:
            if is_zero(n):
                raise NonRational("negative power of an identically zero expression")
            n, d, k = d, n, -k
        if k * max(degree(n), degree(d), 0) > MAX_DEGREE:
            raise DegreeCap(f"degree exceeds {MAX_DEGREE}")
        rn, rd = [1 + 0j], [1 + 0j]
        for _ in range(k):
            rn, rd = poly_mul(rn, n), poly_mul(rd, d)
        return rn, rd
    if isinstance(node, BinOp):
        a, b = _normalize(node.left)
        c, d = _normalize(node.right)
        if node.op == "+":
            out = poly_add(poly_mul(a, d), poly_mul(c, b)), poly_mul(b, d)
        elif node.op == "-":
            out = poly_add(poly_mul(a, d), poly_scale(poly_mul(c, b), -1)), poly_mul(b, d)
        elif node.op == "*":
            out = poly_mul(a, c), poly_mul(b, d)
        else:
            if is_zero(c):
                raise NonRational("division by an identically zero expression")
            out = poly_mul(a, d), poly_mul(b, c)
        _check_degree(*out)
        return out
    raise TypeError(f"unknown node {node!r}")


def parse_rational(text: str) -> RationalMap:
    """Parse ``text`` and normalize it to a single reduced numerator/denominator."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    num, den = _normalize(parse_expression(text))
    _check_degree(num, den)
    return RationalMap(num, den)
