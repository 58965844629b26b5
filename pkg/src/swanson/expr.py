"""One-variable real expressions with exact first and second derivatives.

Formulas such as ``"((gamma+x^2)/(1+x^2))^2"`` are parsed into a small
immutable syntax tree.  Evaluation propagates a :class:`Jet2` (value, first
and second derivative) through the tree, so every node type carries its own
chain rule.  Evaluation accepts scalars or numpy arrays for ``x``.

Grammar (lowest to highest binding)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?          # right associative
    atom  := number | name | name '(' expr ')' | '(' expr ')'
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import special

from .errors import NumericalFailure

FUNCTIONS = frozenset(
    ["sin", "cos", "tan", "sinh", "cosh", "tanh", "sech", "exp", "log", "sqrt",
     "abs", "atan", "asinh", "erf"]
)
CONSTANTS = {"pi": math.pi}
VARIABLE = "x"

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


class ParseError(ValueError):
    """Malformed formula; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}" + (f" in {text!r}" if text else ""))


class UnknownIdentifier(ParseError):
    pass


class DomainError(NumericalFailure, ValueError):
    """Evaluation left the domain of a sub-expression (log of negative, ...)."""

    def __init__(self, message: str, node: "Expression"):
        self.node = node
        super().__init__(f"{message} in sub-expression {node}")


# ---------------------------------------------------------------------------
# Jets


class Jet2:
    """Truncated Taylor triple (value, d/dx, d²/dx²) at one point or a grid."""

    __slots__ = ("value", "d1", "d2")

    def __init__(self, value, d1=0.0, d2=0.0):
        self.value = value
        self.d1 = d1
        self.d2 = d2

    @classmethod
    def variable(cls, x) -> "Jet2":
        x = np.asarray(x, dtype=float) if not np.isscalar(x) else float(x)
        return cls(x, np.ones_like(x) if isinstance(x, np.ndarray) else 1.0, 0.0)

    @staticmethod
    def _lift(other) -> "Jet2":
        return other if isinstance(other, Jet2) else Jet2(other, 0.0, 0.0)

    def __add__(self, other):
        o = self._lift(other)
        return Jet2(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Jet2(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __neg__(self):
        return Jet2(-self.value, -self.d1, -self.d2)

    def __mul__(self, other):
        o = self._lift(other)
        return Jet2(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        inv = 1.0 / self.value
        return Jet2(inv, -self.d1 * inv**2, (2.0 * self.d1**2 * inv - self.d2) * inv**2)

    def __truediv__(self, other):
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def chain(self, f, df, d2f) -> "Jet2":
        """Compose with a scalar function given f, f', f'' at ``self.value``."""
        return Jet2(f, df * self.d1, d2f * self.d1**2 + df * self.d2)

    def is_constant(self) -> bool:
        return bool(np.all(self.d1 == 0.0) and np.all(self.d2 == 0.0))

    def __iter__(self):
        return iter((self.value, self.d1, self.d2))

    def __repr__(self):
        return f"Jet2({self.value!r}, {self.d1!r}, {self.d2!r})"


def _int_power(base: Jet2, n: int) -> Jet2:
    if n < 0:
        return _int_power(base, -n).reciprocal()
    result = Jet2(np.ones_like(base.value) if isinstance(base.value, np.ndarray) else 1.0)
    square = base
    while n:
        if n & 1:
            result = result * square
        n >>= 1
        if n:
            square = square * square
    return result


# ---------------------------------------------------------------------------
# Syntax tree

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


class Expression:
    """Base class of syntax tree nodes."""

    precedence = _PREC_ATOM

    def jet(self, x, params: Mapping[str, float] | None = None) -> Jet2:
        return eval_jet(self, x, params)

    def __call__(self, x, params: Mapping[str, float] | None = None):
        return eval_jet(self, x, params).value

    def __str__(self) -> str:
        return to_text(self)

    def names(self) -> frozenset[str]:
        """Parameter names referenced anywhere in the tree."""
        out: set[str] = set()
        _collect_params(self, out)
        return frozenset(out)


@dataclass(frozen=True, eq=True, repr=True)
class Num(Expression):
    value: float


@dataclass(frozen=True)
class Var(Expression):
    pass


@dataclass(frozen=True)
class Param(Expression):
    name: str


@dataclass(frozen=True)
class Const(Expression):
    name: str


@dataclass(frozen=True)
class Neg(Expression):
    operand: Expression
    precedence = _PREC_UNARY


@dataclass(frozen=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression

    @property
    def precedence(self):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL}.get(self.op, _PREC_POW)


@dataclass(frozen=True)
class Call(Expression):
    func: str
    arg: Expression


def _collect_params(node: Expression, out: set[str]) -> None:
    match node:
        case Param(name):
            out.add(name)
        case Neg(operand) | Call(_, operand):
            _collect_params(operand, out)
        case BinOp(_, left, right):
            _collect_params(left, out)
            _collect_params(right, out)


# ---------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, params):
        self.text = text
        self.params = frozenset(params)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            raise ParseError(f"expected {value!r}", pos, self.text)

    def parse(self) -> Expression:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos, self.text)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if text not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function {text!r}", pos, self.text)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                raise ParseError(f"function {text!r} needs an argument", pos, self.text)
            if text == VARIABLE:
                return Var()
            if text in CONSTANTS:
                return Const(text)
            if text in self.params:
                return Param(text)
            raise UnknownIdentifier(f"unknown identifier {text!r}", pos, self.text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {what}", pos, self.text)


def parse(text: str, params=()) -> Expression:
    """Parse ``text``; names in ``params`` are accepted as free parameters."""
    if not text or not text.strip():
        raise ParseError("empty formula", 0, text)
    return _Parser(text, params).parse()


# ---------------------------------------------------------------------------
# Printer


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(node: Expression, min_prec: int = 0) -> str:
    match node:
        case Num(v):
            s = _fmt_num(v)
        case Var():
            s = VARIABLE
        case Param(name) | Const(name):
            s = name
        case Call(func, arg):
            s = f"{func}({to_text(arg)})"
        case Neg(operand):
            s = "-" + to_text(operand, _PREC_UNARY)
        case BinOp("^", left, right):
            s = f"{to_text(left, _PREC_ATOM)}^{to_text(right, _PREC_UNARY)}"
        case BinOp(op, left, right):
            p = node.precedence
            s = f"{to_text(left, p)}{op}{to_text(right, max(p + 1, _PREC_UNARY) if p == _PREC_MUL else p + 1)}"
        case _:
            raise TypeError(f"not an expression node: {node!r}")
    return f"({s})" if node.precedence < min_prec else s


# ---------------------------------------------------------------------------
# Evaluation


def eval_jet(e: Expression, x, params: Mapping[str, float] | None = None) -> Jet2:
    """Value, first and second x-derivative of ``e`` at ``x`` (scalar or array)."""
    params = dict(params or {})
    missing = e.names() - params.keys()
    if missing:
        raise KeyError(f"unbound parameters: {', '.join(sorted(missing))}")
    out = _eval(e, Jet2.variable(x), params)
    if isinstance(x, np.ndarray) or not np.isscalar(x):
        shape = np.shape(x)
        out = Jet2(*(np.broadcast_to(np.asarray(v, dtype=float), shape) for v in out))
    return out


def _eval(node: Expression, xj: Jet2, params) -> Jet2:
    match node:
        case Num(v):
            return Jet2(v)
        case Var():
            return xj
        case Param(name):
            return Jet2(float(params[name]))
        case Const(name):
            return Jet2(CONSTANTS[name])
        case Neg(operand):
            return -_eval(operand, xj, params)
        case BinOp(op, left, right):
            a = _eval(left, xj, params)
            b = _eval(right, xj, params)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if np.any(b.value == 0.0):
                    raise DomainError("division by zero", node)
                return a / b
            return _power(node, a, b)
        case Call(func, arg):
            return _apply(node, func, _eval(arg, xj, params))
    raise TypeError(f"not an expression node: {node!r}")


def _power(node: Expression, base: Jet2, expo: Jet2) -> Jet2:
    if expo.is_constant() and np.ndim(expo.value) == 0:
        p = float(expo.value)
        if p == int(p) and abs(p) <= 64:
            if p < 0 and np.any(base.value == 0.0):
                raise DomainError("zero raised to a negative power", node)
            return _int_power(base, int(p))
        if np.any(base.value <= 0.0):
            raise DomainError("non-integer power of a non-positive base", node)
        u = base.value
        return base.chain(u**p, p * u ** (p - 1.0), p * (p - 1.0) * u ** (p - 2.0))
    if np.any(base.value <= 0.0):
        raise DomainError("variable exponent needs a positive base", node)
    return _apply(node, "exp", expo * _apply(node, "log", base))


def _apply(node: Expression, func: str, u: Jet2) -> Jet2:
    v = u.value
    if func == "sin":
        s, c = np.sin(v), np.cos(v)
        return u.chain(s, c, -s)
    if func == "cos":
        s, c = np.sin(v), np.cos(v)
        return u.chain(c, -s, -c)
    if func == "tan":
        t = np.tan(v)
        sec2 = 1.0 + t * t
        return u.chain(t, sec2, 2.0 * t * sec2)
    if func == "sinh":
        s, c = np.sinh(v), np.cosh(v)
        return u.chain(s, c, s)
    if func == "cosh":
        s, c = np.sinh(v), np.cosh(v)
        return u.chain(c, s, c)
    if func == "tanh":
        t = np.tanh(v)
        d = 1.0 - t * t
        return u.chain(t, d, -2.0 * t * d)
    if func == "sech":
        s = 1.0 / np.cosh(v)
        t = np.tanh(v)
        return u.chain(s, -s * t, s * t * t - s**3)
    if func == "exp":
        e = np.exp(v)
        return u.chain(e, e, e)
    if func == "log":
        if np.any(v <= 0.0):
            raise DomainError("log of a non-positive value", node)
        inv = 1.0 / v
        return u.chain(np.log(v), inv, -inv * inv)
    if func == "sqrt":
        if np.any(v <= 0.0):
            raise DomainError("sqrt of a non-positive value", node)
        r = np.sqrt(v)
        return u.chain(r, 0.5 / r, -0.25 / (r * v))
    if func == "abs":
        if np.any(v == 0.0):
            raise DomainError("abs is not differentiable at zero", node)
        sg = np.sign(v)
        return u.chain(np.abs(v), sg, 0.0 * sg)
    if func == "atan":
        d = 1.0 / (1.0 + v * v)
        return u.chain(np.arctan(v), d, -2.0 * v * d * d)
    if func == "asinh":
        r = 1.0 / np.sqrt(1.0 + v * v)
        return u.chain(np.arcsinh(v), r, -v * r**3)
    if func == "erf":
        g = _TWO_OVER_SQRT_PI * np.exp(-v * v)
        return u.chain(special.erf(v), g, -2.0 * v * g)
    raise DomainError(f"unknown function {func!r}", node)
