"""Exact rational interval arithmetic and a small expression language for
maps ``R^d -> R^d``.

Endpoints are :class:`fractions.Fraction`, so every operation is exact and
the computed image boxes contain the true images without any rounding
slack. Expressions are written as prefix s-expressions::

    expr  := number | (var i) | (add e e) | (sub e e) | (mul e e)
           | (neg e) | (pow e k) | (pw c e_neg e_nonneg)
    map   := expr | (vec expr ... expr)

``number`` is an integer, ``p/q`` or a finite decimal; ``k`` is a
nonnegative integer; ``(pw c a b)`` evaluates ``a`` where ``c < 0`` and
``b`` where ``c >= 0``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union


class ExpressionError(ValueError):
    """Malformed expression or expression/box mismatch."""


class ParseError(ExpressionError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} (line {line}, column {col})")
        self.line, self.column = line, col


def to_rational(value) -> Fraction:
    """Exact conversion; floats and non-numeric strings are rejected."""
    if isinstance(value, bool):
        raise ExpressionError(f"not a rational constant: {value!r}")
    if isinstance(value, (int, Fraction)) or isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        if not re.fullmatch(r"\s*[+-]?(\d+(/\d+)?|\d*\.\d+|\d+\.\d*)\s*", value):
            raise ExpressionError(f"not a rational constant: {value!r}")
        return Fraction(value.strip())
    raise ExpressionError(f"not a rational constant: {value!r}")


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = to_rational(self.lo), to_rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def meets(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(p), max(p))

    def __pow__(self, k: int) -> "Interval":
        if k < 0:
            raise ExpressionError("negative powers are not supported")
        if k == 0:
            return Interval(1, 1)
        a, b = self.lo ** k, self.hi ** k
        if k % 2:
            return Interval(a, b)
        if self.lo >= 0:
            return Interval(a, b)
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(0, max(a, b))

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


class Box(tuple):
    """Product of closed intervals; dimension is ``len(box)``."""

    def __new__(cls, intervals: Sequence):
        items = tuple(iv if isinstance(iv, Interval) else Interval(*iv) for iv in intervals)
        if not items:
            raise ValueError("a box needs at least one dimension")
        return super().__new__(cls, items)

    @property
    def dim(self) -> int:
        return len(self)

    def contains_point(self, x: Sequence) -> bool:
        return len(x) == len(self) and all(xi in iv for xi, iv in zip(x, self))

    def contains(self, other: "Box") -> bool:
        return all(a.contains(b) for a, b in zip(self, other))

    def meets(self, other: "Box") -> bool:
        return all(a.meets(b) for a, b in zip(self, other))

    def hull(self, other: "Box") -> "Box":
        return Box([a.hull(b) for a, b in zip(self, other)])

    def intersect(self, other: "Box") -> "Box | None":
        parts = [a.intersect(b) for a, b in zip(self, other)]
        return None if any(p is None for p in parts) else Box(parts)

    def split(self, k: int) -> tuple["Box", "Box"]:
        iv = self[k]
        m = iv.mid
        left = list(self)
        right = list(self)
        left[k] = Interval(iv.lo, m)
        right[k] = Interval(m, iv.hi)
        return Box(left), Box(right)

    def __repr__(self) -> str:
        return " x ".join(repr(iv) for iv in self)


# --------------------------------------------------------------------------
# expression tree

class Expr:
    """Scalar expression node."""

    def interval(self, box: Box) -> Interval:
        raise NotImplementedError

    def __call__(self, x: Sequence[Fraction]) -> Fraction:
        raise NotImplementedError

    def max_var(self) -> int:
        return -1


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", to_rational(self.value))

    def interval(self, box):
        return Interval.point(self.value)

    def __call__(self, x):
        return self.value

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(Expr):
    index: int

    def interval(self, box):
        return box[self.index]

    def __call__(self, x):
        return Fraction(x[self.index])

    def max_var(self):
        return self.index

    def __str__(self):
        return f"(var {self.index})"


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    arg: Expr

    def interval(self, box):
        return -self.arg.interval(box)

    def __call__(self, x):
        return -self.arg(x)

    def max_var(self):
        return self.arg.max_var()

    def __str__(self):
        return f"({self.op} {self.arg})"


_BINOPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
}


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def interval(self, box):
        return _BINOPS[self.op](self.left.interval(box), self.right.interval(box))

    def __call__(self, x):
        return _BINOPS[self.op](self.left(x), self.right(x))

    def max_var(self):
        return max(self.left.max_var(), self.right.max_var())

    def __str__(self):
        return f"({self.op} {self.left} {self.right})"


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ExpressionError("exponent must be a nonnegative integer")

    def interval(self, box):
        return self.base.interval(box) ** self.exponent

    def __call__(self, x):
        return self.base(x) ** self.exponent

    def max_var(self):
        return self.base.max_var()

    def __str__(self):
        return f"(pow {self.base} {self.exponent})"


@dataclass(frozen=True)
class Piecewise(Expr):
    """``negative`` where ``cond < 0``, ``nonnegative`` where ``cond >= 0``."""

    cond: Expr
    negative: Expr
    nonnegative: Expr

    def interval(self, box):
        c = self.cond.interval(box)
        if c.hi < 0:
            return self.negative.interval(box)
        if c.lo > 0:
            return self.nonnegative.interval(box)
        # condition touches zero: hull both branches
        return self.negative.interval(box).hull(self.nonnegative.interval(box))

    def __call__(self, x):
        return self.negative(x) if self.cond(x) < 0 else self.nonnegative(x)

    def max_var(self):
        return max(self.cond.max_var(), self.negative.max_var(), self.nonnegative.max_var())

    def __str__(self):
        return f"(pw {self.cond} {self.negative} {self.nonnegative})"


@dataclass(frozen=True)
class MapExpr:
    """A map ``R^d -> R^d`` given by ``d`` scalar component expressions."""

    components: tuple[Expr, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ExpressionError("a map needs at least one component")
        d = len(comps)
        for c in comps:
            if c.max_var() >= d:
                raise ExpressionError(f"variable index {c.max_var()} out of range for arity {d}")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    def __call__(self, x: Sequence) -> tuple[Fraction, ...]:
        if len(x) != self.dim:
            raise ExpressionError(f"point has dimension {len(x)}, map has {self.dim}")
        xs = [to_rational(v) for v in x]
        return tuple(c(xs) for c in self.components)

    def __str__(self):
        if self.dim == 1:
            return str(self.components[0])
        return "(vec " + " ".join(str(c) for c in self.components) + ")"


def evaluate_interval(expr: MapExpr, box: Box | Sequence) -> Box:
    """A box containing ``{expr(x) : x in box}``."""
    if not isinstance(box, Box):
        box = Box(box)
    if box.dim != expr.dim:
        raise ExpressionError(f"box has dimension {box.dim}, map has {expr.dim}")
    return Box([c.interval(box) for c in expr.components])


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")

SExpr = Union[str, list]


def _read(text: str) -> tuple[SExpr, list[int]]:
    pos = 0
    stack: list[tuple[list, int]] = []
    result = None
    positions: list[int] = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        start = m.start(m.lastindex)
        pos = m.end()
        if m.group(1):
            stack.append(([], start))
        elif m.group(2):
            if not stack:
                raise ParseError("unbalanced ')'", text, start)
            node, _ = stack.pop()
            if stack:
                stack[-1][0].append(node)
            elif result is None:
                result = node
            else:
                raise ParseError("trailing input", text, start)
        else:
            tok = m.group(3)
            if stack:
                stack[-1][0].append(tok)
            elif result is None:
                result = tok
            else:
                raise ParseError("trailing input", text, start)
        positions.append(start)
    if stack:
        raise ParseError("missing ')'", text, stack[-1][1])
    if text[pos:].strip():
        raise ParseError("unexpected input", text, pos)
    if result is None:
        raise ParseError("empty expression", text, 0)
    return result, positions


def _build(node: SExpr, text: str) -> Expr:
    if isinstance(node, str):
        try:
            return Const(to_rational(node))
        except ExpressionError as exc:
            raise ParseError(str(exc), text, max(text.find(node), 0)) from None
    if not node:
        raise ParseError("empty form '()'", text, 0)
    head, *args = node
    if not isinstance(head, str):
        raise ParseError("form must start with an operator name", text, 0)

    def arity(n):
        if len(args) != n:
            raise ParseError(f"'{head}' takes {n} argument(s), got {len(args)}", text,
                             max(text.find("(" + head), 0))

    if head == "var":
        arity(1)
        if not isinstance(args[0], str) or not args[0].isdigit():
            raise ParseError("variable index must be a nonnegative integer", text, 0)
        return Var(int(args[0]))
    if head == "neg":
        arity(1)
        return Unary("neg", _build(args[0], text))
    if head in _BINOPS:
        arity(2)
        return Binary(head, _build(args[0], text), _build(args[1], text))
    if head == "pow":
        arity(2)
        if not isinstance(args[1], str) or not args[1].isdigit():
            raise ParseError("exponent must be a nonnegative integer", text, 0)
        return Power(_build(args[0], text), int(args[1]))
    if head == "pw":
        arity(3)
        return Piecewise(*(_build(a, text) for a in args))
    raise ParseError(f"unknown operator '{head}'", text, max(text.find("(" + head), 0))


def parse_expr(text: str) -> Expr:
    node, _ = _read(text)
    if isinstance(node, list) and node and node[0] == "vec":
        raise ParseError("'vec' is only allowed at top level", text, 0)
    return _build(node, text)


def parse_map(text: str) -> MapExpr:
    """Parse a scalar expression (1-d map) or a ``(vec ...)`` form."""
    node, _ = _read(text)
    if isinstance(node, list) and node and node[0] == "vec":
        comps = tuple(_build(n, text) for n in node[1:])
    else:
        comps = (_build(node, text),)
    try:
        return MapExpr(comps)
    except ExpressionError as exc:
        raise ParseError(str(exc), text, 0) from None
