"""Axial coordinate arithmetic and exact predicates.

Frozen numbers were produced by an independent oracle: the Cartesian
embedding x = q + r/2, y = (sqrt3/2) r evaluated with Fractions (the sqrt3
factor cancels or factors out of every predicate used here), plus a BFS
distance oracle on the lattice graph.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from amoebotsim.lattice import (
    DIRECTIONS,
    Direction,
    QuadExpr,
    add,
    cross,
    cross_sign,
    direction_between,
    dot2,
    dot_value,
    is_adjacent,
    lattice_distance,
    neg,
    neighbors,
    norm2,
    scale,
    sqrt_fraction,
    sub,
    to_xy,
)

coords = st.tuples(st.integers(-50, 50), st.integers(-50, 50))


def test_direction_order_is_counterclockwise():
    assert [d.name for d in DIRECTIONS] == ["E", "NE", "NW", "W", "SW", "SE"]
    for i, d in enumerate(DIRECTIONS):
        assert d.ccw() is DIRECTIONS[(i + 1) % 6]
        assert d.cw() is DIRECTIONS[(i - 1) % 6]
        assert d.opposite() is DIRECTIONS[(i + 3) % 6]


def test_direction_vectors():
    assert Direction.E.vec == (1, 0)
    assert Direction.NE.vec == (0, 1)
    assert Direction.NW.vec == (-1, 1)
    assert Direction.W.vec == (-1, 0)
    assert Direction.SW.vec == (0, -1)
    assert Direction.SE.vec == (1, -1)


def test_all_unit_vectors_have_norm_one():
    for d in DIRECTIONS:
        assert norm2(d.vec) == 1


def test_cross_signs_match_cartesian_orientation():
    # Oracle: sign of x1*y2 - y1*x2 in the Cartesian embedding.
    assert cross((1, 0), (0, 1)) > 0
    assert cross((0, 1), (1, -1)) < 0
    assert cross_sign((1, 0), (0, 1)) == 1
    assert cross_sign((0, 1), (1, -1)) == -1
    assert cross_sign((2, -1), (4, -2)) == 0


def test_dot_values_oracle():
    # Oracle: q1*q2 + (q1*r2 + q2*r1)/2 + r1*r2, exact in Fractions.
    assert dot_value((1, 0), (0, 1)) == Fraction(1, 2)
    assert dot_value((1, 0), (-1, 1)) == Fraction(-1, 2)
    east = (1, 0)
    expected = {"E": 2, "NE": 1, "NW": -1, "W": -2, "SW": -1, "SE": 1}
    for d in DIRECTIONS:
        assert dot2(east, d.vec) == expected[d.name]


@given(coords, coords)
def test_cross_matches_cartesian(u, w):
    ux, uy = to_xy(u)
    wx, wy = to_xy(w)
    c = ux * wy - uy * wx
    assert cross_sign(u, w) == (c > 1e-9) - (c < -1e-9)


@given(coords, coords)
def test_dot_matches_cartesian(u, w):
    ux, uy = to_xy(u)
    wx, wy = to_xy(w)
    assert math.isclose(float(dot_value(u, w)), ux * wx + uy * wy, abs_tol=1e-6)


@given(coords)
def test_norm_matches_cartesian_length(v):
    x, y = to_xy(v)
    assert math.isclose(norm2(v), x * x + y * y, abs_tol=1e-6)


def test_lattice_distance_frozen_samples():
    # BFS oracle on the lattice graph produced these.
    assert lattice_distance((0, 0), (3, -1)) == 3
    assert lattice_distance((0, 0), (-2, 5)) == 5
    assert lattice_distance((1, 2), (-3, 1)) == 5
    assert lattice_distance((0, 0), (4, 4)) == 8
    assert lattice_distance((2, -7), (-1, 3)) == 10


@given(coords, coords)
def test_lattice_distance_is_a_metric(a, b):
    d = lattice_distance(a, b)
    assert d == lattice_distance(b, a)
    assert (d == 0) == (a == b)
    if a != b:
        # one step toward b along some direction decreases the distance
        assert any(
            lattice_distance(add(a, v.vec), b) == d - 1 for v in DIRECTIONS
        )


def test_neighbors_and_adjacency():
    n = neighbors((2, -1))
    assert len(n) == 6
    assert len(set(n)) == 6
    for m in n:
        assert is_adjacent((2, -1), m)
        assert lattice_distance((2, -1), m) == 1
    assert not is_adjacent((0, 0), (2, 0))
    assert not is_adjacent((0, 0), (0, 0))


def test_direction_between():
    assert direction_between((0, 0), (1, 0)) is Direction.E
    assert direction_between((1, 0), (0, 0)) is Direction.W
    assert direction_between((0, 0), (2, 0)) is None


def test_vector_helpers():
    assert add((1, 2), (3, -1)) == (4, 1)
    assert sub((1, 2), (3, -1)) == (-2, 3)
    assert neg((1, -2)) == (-1, 2)
    assert scale((1, -2), 3) == (3, -6)


def test_sqrt_fraction_brackets_the_true_root():
    for v in (Fraction(2), Fraction(3, 4), Fraction(10, 7)):
        r = sqrt_fraction(v, bits=64)
        assert abs(r * r - v) < Fraction(1, 2**60)


class TestQuadExpr:
    def test_perfect_square_folds_to_rational(self):
        x = QuadExpr(1, 3, 4)  # 1 + 3*sqrt(4) = 7
        assert x == 7
        assert x.d == 0

    def test_ring_arithmetic(self):
        r2 = QuadExpr(0, 1, 2)
        assert (r2 * r2) == 2
        x = (1 + r2) * (1 - r2)
        assert x == -1
        assert (r2 + r2) == QuadExpr(0, 2, 2)
        assert r2 / 2 == QuadExpr(0, Fraction(1, 2), 2)

    def test_sign_and_order(self):
        r2 = QuadExpr(0, 1, 2)
        assert (r2 - 1).sign() == 1
        assert (r2 - 2).sign() == -1
        assert (1 - r2) < 0 < (2 - r2)
        # 3 - 2*sqrt(2) is positive but tiny; sign analysis must not round
        assert (3 - 2 * r2).sign() == 1
        assert (2 * r2 - 3).sign() == -1

    def test_mixed_comparisons_with_rationals(self):
        r3 = QuadExpr(0, 1, 3)
        assert r3 > Fraction(3, 2)
        assert r3 < Fraction(7, 4)
        assert r3 != 2

    def test_approx_is_close(self):
        r5 = QuadExpr(2, -1, 5)  # 2 - sqrt(5) = -0.2360679...
        a = r5.approx(bits=64)
        assert abs(float(a) - (2 - math.sqrt(5))) < 1e-12

    def test_incompatible_radicals_rejected(self):
        with pytest.raises(ValueError):
            QuadExpr(0, 1, 2) + QuadExpr(0, 1, 3)


@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(0, 30))
def test_quadexpr_sign_matches_float(a, b, d):
    x = QuadExpr(a, b, d)
    f = a + b * math.sqrt(d)
    if abs(f) > 1e-6:
        assert x.sign() == (1 if f > 0 else -1)
