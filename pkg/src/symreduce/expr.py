"""A small input language for k-symmetric polynomials.

    n=3 k=2; 1/2*P[2,0]^2 - sym(x[1,1]*x[2,2]) + 3

``P[a1,...,ak]`` is a power sum, ``sym(e)`` sums the distinct row-permutation
images of ``e`` (each image counted once, not once per permutation), ``^``
takes non-negative integer exponents.  Unary minus and ``#`` comments are
accepted as conveniences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

from .multisym import power_sum, symmetrize
from .poly import Polynomial, PolyFormatError, parse_polynomial


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    row: int
    col: int


@dataclass(frozen=True)
class PowerSum:
    alpha: Tuple[int, ...]


@dataclass(frozen=True)
class Sym:
    arg: "Expression"


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Pow:
    base: "Expression"
    exp: int


Expression = Union[Num, Var, PowerSum, Sym, Neg, BinOp, Pow]


# --- tokens ----------------------------------------------------------------

_TOKEN = re.compile(r"(#[^\n]*)|(\d+)|(sym|x|P|n|k)\b|(\S)")


@dataclass
class Tok:
    kind: str  # int, name, op, end
    text: str
    pos: int


def _tokenize(src: str) -> List[Tok]:
    toks = []
    for mt in _TOKEN.finditer(src):
        comment, num, name, op = mt.groups()
        if num is not None:
            toks.append(Tok("int", num, mt.start()))
        elif name is not None:
            toks.append(Tok("name", name, mt.start()))
        elif op is not None:
            if op.isalpha() or op == "_":
                raise ExprSyntaxError(f"unexpected character {op!r}", *_linecol(src, mt.start()))
            toks.append(Tok("op", op, mt.start()))
    toks.append(Tok("end", "", len(src)))
    return toks


def _linecol(src: str, pos: int) -> Tuple[int, int]:
    line = src.count("\n", 0, pos) + 1
    return line, pos - (src.rfind("\n", 0, pos) + 1) + 1


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.n = self.k = 0

    def error(self, msg: str, tok: Tok = None):
        tok = tok or self.peek()
        raise ExprSyntaxError(msg, *_linecol(self.src, tok.pos))

    def peek(self) -> Tok:
        return self.toks[self.i]

    def take(self) -> Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> Tok:
        tok = self.peek()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.take()

    def integer(self) -> int:
        tok = self.peek()
        if tok.kind != "int":
            if tok.text == "-":
                self.error("negative values are not allowed here")
            self.error(f"expected an integer, found {tok.text or 'end of input'!r}")
        return int(self.take().text)

    def header(self):
        self.expect("n")
        self.expect("=")
        self.n = self.integer()
        self.expect("k")
        self.expect("=")
        self.k = self.integer()
        if self.n < 1 or self.k < 1:
            self.error("n and k must be positive", self.toks[self.i - 1])
        self.expect(";")

    def expr(self) -> Expression:
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self.peek().text == "*":
            self.take()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Expression:
        if self.peek().text == "-":
            self.take()
            return Neg(self.factor())
        if self.peek().text == "+":
            self.take()
            return self.factor()
        base = self.base()
        if self.peek().text == "^":
            self.take()
            if self.peek().text == "-":
                self.error("negative exponent")
            base = Pow(base, self.integer())
        return base

    def base(self) -> Expression:
        tok = self.peek()
        if tok.kind == "int":
            num = Fraction(self.integer())
            if self.peek().text == "/" and self.toks[self.i + 1].kind == "int":
                self.take()
                den_tok = self.peek()
                den = self.integer()
                if den == 0:
                    self.error("division by zero", den_tok)
                num /= den
            return Num(num)
        if tok.text == "x":
            self.take()
            self.expect("[")
            i = self.integer()
            self.expect(",")
            j = self.integer()
            self.expect("]")
            if not (1 <= i <= self.n and 1 <= j <= self.k):
                self.error(f"x[{i},{j}] is outside the declared {self.n}x{self.k} array", tok)
            return Var(i, j)
        if tok.text == "P":
            self.take()
            self.expect("[")
            alpha = [self.integer()]
            while self.peek().text == ",":
                self.take()
                alpha.append(self.integer())
            self.expect("]")
            if len(alpha) != self.k:
                self.error(f"P[...] needs {self.k} exponents, got {len(alpha)}", tok)
            if not any(alpha):
                self.error("P[0,...,0] is not a power sum", tok)
            return PowerSum(tuple(alpha))
        if tok.text == "sym":
            self.take()
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Sym(inner)
        if tok.text == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse_expression(source: str) -> Tuple[int, int, Expression]:
    p = _Parser(source)
    p.header()
    node = p.expr()
    if p.peek().kind != "end":
        p.error(f"unexpected {p.peek().text!r}")
    return p.n, p.k, node


def elaborate(node: Expression, n: int, k: int) -> Polynomial:
    if isinstance(node, Num):
        return Polynomial.constant(node.value, n, k)
    if isinstance(node, Var):
        return Polynomial.var(node.row, node.col, n, k)
    if isinstance(node, PowerSum):
        return power_sum(node.alpha, (n, k))
    if isinstance(node, Sym):
        return symmetrize(elaborate(node.arg, n, k))
    if isinstance(node, Neg):
        return -elaborate(node.arg, n, k)
    if isinstance(node, Pow):
        return elaborate(node.base, n, k) ** node.exp
    left, right = elaborate(node.left, n, k), elaborate(node.right, n, k)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    return left * right


def parse(source: str) -> Tuple[Expression, Polynomial]:
    n, k, node = parse_expression(source)
    return node, elaborate(node, n, k)


def load_polynomial(text: str) -> Polynomial:
    """Accept either the expression language or the canonical ``poly`` format."""
    body = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if body and body[0].startswith("poly"):
        return parse_polynomial(text)
    return parse(text)[1]


__all__ = ["ExprSyntaxError", "Expression", "Num", "Var", "PowerSum", "Sym", "Neg", "BinOp", "Pow",
           "parse", "parse_expression", "elaborate", "load_polynomial", "PolyFormatError"]
