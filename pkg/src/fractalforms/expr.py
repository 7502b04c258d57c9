"""A small expression language for scalar functions of ``x`` and ``y``.

Grammar (standard precedence, left associative; ``^`` binds tighter than
unary minus)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' ['-'] INT)?
    atom   := NUMBER | 'x' | 'y' | '(' expr ')' | IDENT '(' expr ')'

Expressions evaluate on floats or numpy arrays; gradients come from
forward-mode dual numbers, so they are exact up to rounding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dual import Dual
from .errors import ParseError, UnknownIdentifierError

VARIABLES = ("x", "y")


def _apply(name: str, a):
    if isinstance(a, Dual):
        return getattr(a, name)()
    return getattr(np, name)(a)


FUNCTIONS: dict[str, Callable] = {
    name: (lambda a, _n=name: _apply(_n, a)) for name in ("sin", "cos", "exp", "sqrt")
}

# precedence levels used by the printer
_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


class Expr:
    """Base class of expression nodes.

    Nodes are immutable and compare structurally.  Arithmetic operators build
    new trees, so ``Var("x") * Var("y")`` is the expression ``x*y``.
    """

    precedence = _ATOM

    def eval(self, x, y):
        raise NotImplementedError

    def to_source(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_source()

    # scalar-field protocol used by the form machinery: points have shape (..., 2)
    def value(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        with np.errstate(all="ignore"):
            out = self.eval(p[..., 0], p[..., 1])
        return np.broadcast_to(np.asarray(out, dtype=float), p.shape[:-1]).copy()

    def grad(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        x = Dual.variable(p[..., 0], 0, 2)
        y = Dual.variable(p[..., 1], 1, 2)
        with np.errstate(all="ignore"):
            out = self.eval(x, y)
        der = out.der if isinstance(out, Dual) else 0.0
        der = np.broadcast_to(der, (2,) + p.shape[:-1])
        return np.moveaxis(der, 0, -1).copy()

    def __call__(self, x, y):
        with np.errstate(all="ignore"):
            return self.eval(x, y)

    @staticmethod
    def coerce(value) -> "Expr":
        if isinstance(value, Expr):
            return value
        if isinstance(value, (int, float, np.floating, np.integer)):
            v = float(value)
            return Num(v) if v >= 0 else Neg(Num(-v))
        if isinstance(value, str):
            return parse(value)
        raise TypeError(f"cannot convert {value!r} to an expression")

    def __add__(self, other):
        return BinOp("+", self, Expr.coerce(other))

    def __radd__(self, other):
        return BinOp("+", Expr.coerce(other), self)

    def __sub__(self, other):
        return BinOp("-", self, Expr.coerce(other))

    def __rsub__(self, other):
        return BinOp("-", Expr.coerce(other), self)

    def __mul__(self, other):
        return BinOp("*", self, Expr.coerce(other))

    def __rmul__(self, other):
        return BinOp("*", Expr.coerce(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, Expr.coerce(other))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, int(n))


def _wrap(e: Expr, min_prec: int) -> str:
    s = e.to_source()
    return f"({s})" if e.precedence < min_prec else s


@dataclass(frozen=True)
class Num(Expr):
    number: float

    def eval(self, x, y):
        return self.number

    def to_source(self) -> str:
        return repr(float(self.number))


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def eval(self, x, y):
        return x if self.name == "x" else y

    def to_source(self) -> str:
        return self.name


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    precedence = _UNARY

    def eval(self, x, y):
        return -self.arg.eval(x, y)

    def to_source(self) -> str:
        return "-" + _wrap(self.arg, _UNARY)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int
    precedence = _POW

    def eval(self, x, y):
        b = self.base.eval(x, y)
        if self.exponent < 0:
            return 1.0 / (b ** (-self.exponent))
        return b**self.exponent

    def to_source(self) -> str:
        return f"{_wrap(self.base, _ATOM)}^{self.exponent}"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    @property
    def precedence(self):  # type: ignore[override]
        return _ADD if self.op in "+-" else _MUL

    def eval(self, x, y):
        a = self.left.eval(x, y)
        b = self.right.eval(x, y)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def to_source(self) -> str:
        p = self.precedence
        # left associativity: the right operand needs one more level
        return f"{_wrap(self.left, p)} {self.op} {_wrap(self.right, p + 1)}"


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr

    def eval(self, x, y):
        return FUNCTIONS[self.name](self.arg.eval(x, y))

    def to_source(self) -> str:
        return f"{self.name}({self.arg.to_source()})"


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(_Token("eof", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


_ATOM_START = frozenset({"NUMBER", "x", "y", "(", "FUNCTION", "-"})


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind not in ("op",):
            raise ParseError(f"unexpected {self._describe()}", self.tok.offset, frozenset({text}))
        self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "eof" else f"token {self.tok.text!r}"

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            raise ParseError(
                f"unexpected {self._describe()}", self.tok.offset, frozenset({"+", "-", "*", "/", "^", "end of input"})
            )
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.factor())
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            sign = 1
            if self.tok.kind == "op" and self.tok.text == "-":
                self.advance()
                sign = -1
            t = self.tok
            if t.kind != "number" or not t.text.isdigit():
                raise ParseError(f"unexpected {self._describe()}", t.offset, frozenset({"INT"}))
            self.advance()
            return Pow(base, sign * int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self.advance()
            if t.text in VARIABLES:
                return Var(t.text)
            if t.text not in FUNCTIONS:
                raise UnknownIdentifierError(
                    f"unknown identifier {t.text!r}", t.offset, frozenset(VARIABLES) | frozenset(FUNCTIONS)
                )
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(t.text, arg)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {self._describe()}", t.offset, _ATOM_START)


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree; raises :class:`ParseError`."""
    return _Parser(source).parse()


def x() -> Expr:
    return Var("x")


def y() -> Expr:
    return Var("y")


def random_expr(rng: np.random.Generator, depth: int = 3) -> Expr:
    """A random smooth expression, total on the plane and tame on the unit square.

    Division and ``sqrt`` are only applied to arguments of the form ``1 + e^2``,
    so the result is finite and ``C^1`` everywhere.
    """
    if depth <= 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.35:
            return Var("x")
        if r < 0.7:
            return Var("y")
        return Num(float(rng.integers(1, 10)) / float(rng.integers(1, 5)))
    kind = rng.integers(0, 8)
    sub = lambda: random_expr(rng, depth - 1)  # noqa: E731
    if kind <= 2:
        return BinOp(("+", "-", "*")[kind], sub(), sub())
    if kind == 3:
        return BinOp("/", sub(), BinOp("+", Num(1.0), Pow(sub(), 2)))
    if kind == 4:
        return Neg(sub())
    if kind == 5:
        return Pow(sub(), int(rng.integers(0, 4)))
    name = str(rng.choice(["sin", "cos", "exp", "sqrt"]))
    if name == "sqrt":
        return Call(name, BinOp("+", Num(1.0), Pow(sub(), 2)))
    if name == "exp":
        return Call(name, Call("sin", sub()))
    return Call(name, sub())
