from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from padictree.balls import (
    Ball,
    ball_from_point,
    ball_residues,
    build_set_S,
    child,
    children,
    decode_ball,
    descendants,
    distance,
    encode_ball,
    parent,
    path_index,
    recover_from_S,
    set_S_from_members,
    set_S_residues,
    span_region,
    sup,
    tangent_class,
    to_dot,
)
from padictree.core import PAdicVec
from padictree.errors import (
    DegenerateBasis,
    EnumerationCap,
    InsufficientPrecision,
    InvalidDirection,
    NotASetS,
    NotInBall,
)
from padictree.quadrature import completion_basis


def test_sup_of_zero_and_one_is_the_unit_ball():
    assert sup((0,), (1,), p=2) == Ball(2, 1, 0)
    assert sup((0,), (4,), p=2) == Ball(2, 1, 2)
    assert sup(Ball(3, 1, 2, (1,)), Ball(3, 1, 1, (1,))) == Ball(3, 1, 1, (1,))


def test_ball_membership_and_canonical_centre():
    ball = Ball(2, 1, 1, (5,))
    assert ball.center == (Fraction(1),)
    assert ball.contains((Fraction(7),))
    assert not ball.contains((Fraction(2),))
    assert ball.diameter() == Fraction(1, 2)
    assert Ball(3, 2, 1).measure() == Fraction(1, 9)
    assert ball_from_point((Fraction(5),), 2, p=2) == Ball(2, 1, 2, (1,))


def test_tree_navigation():
    unit = Ball.unit(3)
    assert [b.center for b in descendants(unit, 1)] == [(0,), (1,), (2,)]
    assert len(children(Ball.unit(2, 3))) == 8
    assert parent(child(unit, (2,))) == unit
    assert path_index(Ball.unit(2), Ball(2, 1, 2, (3,))) == 3


def test_tangent_class_and_distance():
    assert tangent_class(Ball.unit(3), (Fraction(7),)) == (1,)
    assert tangent_class(Ball.unit(3), (Fraction(7),), x_b=(Fraction(2),)) == (2,)
    with pytest.raises(NotInBall):
        tangent_class(Ball.unit(3), (Fraction(1, 3),))
    assert distance((0,), (4,), 2) == Fraction(1, 4)
    assert distance((1,), (1,), 2) == 0


def test_points_need_enough_digits():
    x = PAdicVec.from_ints((1,), 2, precision=3)
    assert ball_from_point(x, 3) == Ball(2, 1, 3, (1,))
    with pytest.raises(InsufficientPrecision):
        ball_from_point(x, 5)


@given(st.lists(st.integers(min_value=-500, max_value=500), min_size=3, max_size=3, unique=True))
def test_distance_is_ultrametric(points):
    x, y, z = [(Fraction(v),) for v in points]
    assert distance(x, z, 3) <= max(distance(x, y, 3), distance(y, z, 3))


def test_set_s_members_and_measure():
    ball = Ball.unit(3, 2)
    b0 = child(ball, (0, 0))
    s = build_set_S(ball, (1, 2), b0)
    assert sorted(m.center for m in s.members) == [(1, 2), (2, 1)]
    assert s.measure() == Fraction(2, 9)
    assert build_set_S(ball, (2, 1), b0) == s
    assert recover_from_S(s.members) == ((1, 2), b0)


def test_set_s_rejects_bad_input():
    ball = Ball.unit(3, 2)
    with pytest.raises(InvalidDirection):
        build_set_S(ball, (3, 0), child(ball, (0, 0)))
    with pytest.raises(NotInBall):
        build_set_S(ball, (1, 0), Ball(3, 2, 2))
    five = Ball.unit(5, 2)
    scattered = [child(five, c) for c in ((1, 0), (0, 1), (1, 1), (2, 3))]
    with pytest.raises(NotASetS):
        recover_from_S(scattered)


def test_set_s_for_p2_uses_the_canonical_pair():
    ball = Ball.unit(2, 2)
    s = build_set_S(ball, (1, 1), child(ball, (0, 0)))
    assert [m.center for m in s.members] == [(1, 1)]
    k1, b0 = recover_from_S(s.members)
    assert k1 == (1, 0)
    assert b0 == child(ball, (0, 1))
    assert set_S_from_members(s.members) == s


@pytest.mark.parametrize("p,d", [(2, 1), (3, 2), (5, 1), (2, 3)])
def test_set_s_is_the_tube_around_b0(p, d):
    ball = Ball(p, d, 1, (1,) * d)
    k1 = (1,) + (p - 1,) * (d - 1)
    b0 = child(ball, (0,) * d)
    s = build_set_S(ball, k1, b0)
    for variant in ("A", "B"):
        tube = span_region(b0.center, completion_basis(k1, p, variant), "tube", 1, precision=3, p=p)
        assert tube == set_S_residues(s, 3)


def test_span_region_ball_and_sphere():
    basis = [(1, 0), (0, 1)]
    assert span_region((0, 0), basis, "ball", 0, precision=1, p=3) == ball_residues(Ball.unit(3, 2), 1)
    assert len(span_region((0, 0), basis, "sphere", 0, precision=1, p=3)) == 8
    with pytest.raises(DegenerateBasis):
        span_region((0, 0), [(1, 0), (2, 0)], "ball", 0, p=3)
    with pytest.raises(EnumerationCap):
        ball_residues(Ball.unit(5, 3), 5, cap=100)


def test_encoding_round_trip():
    balls = [Ball(2, 1, 2, (1,)), Ball(3, 1, 0, (Fraction(5, 9),)), Ball(13, 2, 1, (12, 3)), Ball.unit(5, 3)]
    assert encode_ball(balls[0]) == "p=2;d=1;L=2;c=10"
    assert encode_ball(balls[3]) == "p=5;d=3;L=0;c=;;"
    for ball in balls:
        assert decode_ball(encode_ball(ball)) == ball


def test_dot_export_lists_children():
    text = to_dot(Ball.unit(2), depth=1)
    assert text.startswith("digraph")
    assert text.count("->") == 2
