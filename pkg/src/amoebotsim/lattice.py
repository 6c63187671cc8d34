"""Axial coordinates, directions and exact arithmetic for the triangular lattice.

Nodes live at integer axial coordinates (q, r).  The Cartesian embedding is
x = q + r/2, y = (sqrt(3)/2) * r, which places the six lattice directions at
unit length and 60 degree spacing.  Every predicate here is exact: the
irrational factor sqrt(3)/2 cancels out of signs, so orientation and dot
comparisons reduce to integer or rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import isqrt, sqrt

Vec = tuple[int, int]
NodeCoord = tuple[int, int]


class Direction(Enum):
    """The six cardinal directions, in counterclockwise order starting east."""

    E = (1, 0)
    NE = (0, 1)
    NW = (-1, 1)
    W = (-1, 0)
    SW = (0, -1)
    SE = (1, -1)

    @property
    def vec(self) -> Vec:
        return self.value

    def opposite(self) -> "Direction":
        return Direction((-self.value[0], -self.value[1]))

    def ccw(self, steps: int = 1) -> "Direction":
        order = list(Direction)
        return order[(order.index(self) + steps) % 6]

    def cw(self, steps: int = 1) -> "Direction":
        return self.ccw(-steps)


DIRECTIONS: tuple[Direction, ...] = tuple(Direction)
DIRECTION_VECTORS: tuple[Vec, ...] = tuple(d.value for d in Direction)
_UNIT_VECS = frozenset(DIRECTION_VECTORS)


def direction_vector(d: Direction) -> Vec:
    return d.value


def add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def neg(a):
    return (-a[0], -a[1])


def scale(a, k):
    return (a[0] * k, a[1] * k)


def neighbors(node: NodeCoord) -> list[NodeCoord]:
    q, r = node
    return [(q + dq, r + dr) for dq, dr in DIRECTION_VECTORS]


def is_adjacent(a: NodeCoord, b: NodeCoord) -> bool:
    return (b[0] - a[0], b[1] - a[1]) in _UNIT_VECS


def direction_between(a: NodeCoord, b: NodeCoord) -> Direction | None:
    """Direction from a to b if they are adjacent, else None."""
    v = (b[0] - a[0], b[1] - a[1])
    return Direction(v) if v in _UNIT_VECS else None


def cross(a, b) -> int:
    """Integer determinant a.q*b.r - a.r*b.q.

    The Cartesian cross product equals (sqrt(3)/2) times this, so the sign
    carries over unchanged.
    """
    return a[0] * b[1] - a[1] * b[0]


def cross_sign(a, b) -> int:
    c = cross(a, b)
    return (c > 0) - (c < 0)


def dot_value(a, b) -> Fraction:
    """Exact Cartesian dot product (Gram matrix [[1,1/2],[1/2,1]])."""
    return Fraction(dot2(a, b), 2)


def dot2(a, b) -> int:
    """Twice the Cartesian dot product; always an integer."""
    return 2 * a[0] * b[0] + a[0] * b[1] + a[1] * b[0] + 2 * a[1] * b[1]


def norm2(v) -> int:
    """Squared Euclidean length; integer because q^2 + q*r + r^2."""
    return v[0] * v[0] + v[0] * v[1] + v[1] * v[1]


def lattice_distance(a: NodeCoord, b: NodeCoord) -> int:
    """Graph distance on the triangular lattice."""
    dq = b[0] - a[0]
    dr = b[1] - a[1]
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2


def to_xy(node, unit: float = 1.0) -> tuple[float, float]:
    """Cartesian embedding; presentation only, never used in predicates."""
    q, r = node
    return ((q + r * 0.5) * unit, (sqrt(3.0) / 2.0) * r * unit)


@dataclass(frozen=True)
class AffineVec:
    """Time-dependent displacement base + t*rate over t in [0, 1].

    Both components are integer lattice vectors, so the evaluation is a
    lattice point at t = 0 and t = 1 and exact for any rational t.
    """

    base: Vec
    rate: Vec

    def at(self, t):
        return (
            self.base[0] + t * self.rate[0],
            self.base[1] + t * self.rate[1],
        )

    def end(self) -> Vec:
        return (self.base[0] + self.rate[0], self.base[1] + self.rate[1])


ZERO_MOTION = AffineVec((0, 0), (0, 0))


def sqrt_fraction(value: Fraction, bits: int = 64) -> Fraction:
    """Rational approximation of sqrt(value) with error below 2**-bits (plus
    the floor rounding of isqrt), suitable for ordering well-separated roots.

    Soundness of the collision tester never depends on this accuracy; it only
    affects which sample points get tried.
    """
    if value < 0:
        raise ValueError("negative radicand")
    num = value.numerator << (2 * bits)
    return Fraction(isqrt(num // value.denominator), 1 << bits)


class QuadExpr:
    """Exact number a + b*sqrt(d) with rational a, b and integer d >= 0.

    Supports ring arithmetic within one quadratic extension plus exact sign
    tests, which is everything the collision predicates need.  Values with
    b == 0 behave as plain rationals and combine with any d.  Perfect-square
    discriminants are folded into the rational part on construction.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d=0):
        a = Fraction(a)
        b = Fraction(b)
        d = int(d)
        if d < 0:
            raise ValueError("negative discriminant")
        if b and d:
            root = isqrt(d)
            if root * root == d:
                a += b * root
                b = Fraction(0)
        if not b or not d:
            b = Fraction(0)
            d = 0
        self.a = a
        self.b = b
        self.d = d

    @staticmethod
    def _coerce(value) -> "QuadExpr | None":
        if isinstance(value, QuadExpr):
            return value
        if isinstance(value, (int, Fraction)):
            return QuadExpr(value)
        return None

    def _join(self, other: "QuadExpr") -> int:
        if self.d and other.d and self.d != other.d:
            raise ValueError(f"mixed discriminants {self.d} and {other.d}")
        return self.d or other.d

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExpr(self.a + o.a, self.b + o.b, self._join(o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExpr(self.a - o.a, self.b - o.b, self._join(o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadExpr(o.a - self.a, o.b - self.b, self._join(o))

    def __neg__(self):
        return QuadExpr(-self.a, -self.b, self.d)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self._join(o)
        return QuadExpr(
            self.a * o.a + self.b * o.b * d,
            self.a * o.b + self.b * o.a,
            d,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadExpr(self.a / other, self.b / other, self.d)
        return NotImplemented

    def sign(self) -> int:
        a, b, d = self.a, self.b, self.d
        if not b:
            return (a > 0) - (a < 0)
        if not a:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        lhs = a * a
        rhs = b * b * d
        if a > 0:
            # b < 0: value positive iff a^2 beats b^2*d
            return (lhs > rhs) - (lhs < rhs)
        return (rhs > lhs) - (rhs < lhs)

    def __bool__(self) -> bool:
        return self.sign() != 0

    def _cmp(self, other) -> int | None:
        o = self._coerce(other)
        if o is None:
            return None
        return (self - o).sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * sqrt(self.d)

    def approx(self, bits: int = 64) -> Fraction:
        return self.a + self.b * sqrt_fraction(Fraction(self.d), bits)

    def __repr__(self) -> str:
        if not self.b:
            return f"QuadExpr({self.a})"
        return f"QuadExpr({self.a} + {self.b}*sqrt({self.d}))"
