from fractions import Fraction

import pytest

from padictree.balls import Ball, ball_from_point, child, descendants
from padictree.core import PAdicVec
from padictree.errors import IdentityViolation, InvalidAction
from padictree.morphisms import (
    AffineMorphism,
    ChildAction,
    DifferentiableSpec,
    compose,
    derivative_norm,
    identity_morphism,
    image_ball,
    invert,
    is_isometry_check,
    is_mod_p_affine,
    make_dilation,
    make_isometry,
    make_translation,
    parabolic_normalize,
    tangent_map,
    tangent_map_with_base,
)


def test_child_action_must_be_a_bijection():
    with pytest.raises(InvalidAction):
        ChildAction(3, 1, (0, 0, 1))
    act = ChildAction.from_affine(3, ((1, 1), (0, 1)), (2, 0))
    assert act.affine_form() == (((1, 1), (0, 1)), (2, 0))
    assert act.inverse().after(act).is_identity
    with pytest.raises(InvalidAction):
        ChildAction.from_affine(3, ((1, 2), (2, 1)), (0, 0))


def test_non_affine_permutation_is_detected():
    phi = make_isometry(5, 1, table={Ball.unit(5): (0, 2, 1, 3, 4)})
    assert not is_mod_p_affine(phi, [Ball.unit(5)])
    affine = make_isometry(3, 2, seed=1, mode="affine")
    assert is_mod_p_affine(affine, [Ball.unit(3, 2), Ball(3, 2, 2, (4, 5))])


def test_seeded_isometries_are_reproducible():
    first = make_isometry(3, 1, seed=11)
    second = make_isometry(3, 1, seed=11)
    for ball in descendants(Ball.unit(3), 3):
        assert first.image_ball(ball) == second.image_ball(ball)
        assert first.preimage_ball(first.image_ball(ball)) == ball
    with pytest.raises(InvalidAction):
        make_isometry(3, 1, seed=1, mode="shuffle")


def test_seeded_isometry_passes_the_isometry_check():
    report = is_isometry_check(make_isometry(2, 1, seed=5, top_level=-2), sample_count=200)
    assert report.passed
    assert report.checked == 200
    assert not is_isometry_check(make_dilation(1, 2)).passed


def test_dilation_shifts_levels():
    phi = make_dilation(1, 2)
    assert phi.image_ball(Ball.unit(2)) == Ball(2, 1, 1)
    assert phi.image_ball(Ball(2, 1, 1, (1,))) == Ball(2, 1, 2, (2,))
    assert phi.preimage_ball(Ball(2, 1, 1)) == Ball.unit(2)
    assert make_dilation(0, 2).gamma == 0


def test_compose_merges_dilations():
    phi = compose(make_dilation(1, 3), make_dilation(-1, 3))
    assert phi.gamma == 0
    ball = Ball(3, 1, 2, (5,))
    assert phi.image_ball(ball) == ball
    iso = make_isometry(3, 1, seed=2)
    chain = compose(make_dilation(2, 3), iso, make_dilation(-1, 3))
    assert chain.gamma == 1


def test_invert_undoes_a_chain():
    chain = compose(make_dilation(1, 3), make_isometry(3, 1, seed=4, top_level=-1), make_translation((Fraction(1, 3),), 3))
    inverse = invert(chain)
    for ball in descendants(Ball(3, 1, -1), 2):
        assert inverse.image_ball(chain.image_ball(ball)) == ball
    assert inverse.gamma == -1


def test_translation_moves_centres():
    phi = make_translation((Fraction(1),), 2)
    assert phi.image_ball(Ball(2, 1, 1, (0,))) == Ball(2, 1, 1, (1,))
    # adding 1 to 1 + 2Z_2 carries into position 1
    act = phi.child_action(Ball(2, 1, 1, (1,)))
    assert act.table == (1, 0)


def test_parabolic_normalize_splits_off_the_dilation():
    phi = compose(make_dilation(2, 3), make_isometry(3, 1, seed=9, top_level=-1))
    gamma, eta = parabolic_normalize(phi)
    assert gamma == 2
    assert eta.gamma == 0
    assert is_isometry_check(eta, sample_count=100).passed
    again, _ = parabolic_normalize(eta)
    assert again == 0
    assert parabolic_normalize(identity_morphism(3))[0] == 0


def test_tangent_map_with_canonical_base_points():
    phi = make_isometry(3, 2, seed=3, mode="affine")
    ball = Ball(3, 2, 1, (1, 2))
    image = phi.image_ball(ball)
    assert tangent_map_with_base(phi, ball, ball.center, image.center) == tangent_map(phi, ball)
    shifted = tangent_map_with_base(phi, ball, child(ball, (1, 0)).center, image.center)
    assert shifted.affine_form()[0] == tangent_map(phi, ball).affine_form()[0]


def test_affine_morphism_balls_and_derivative():
    spec = DifferentiableSpec(2, (Fraction(1),), Fraction(2))
    phi = AffineMorphism(spec)
    assert phi.gamma == 1
    assert phi.image_ball(Ball.unit(2)) == Ball(2, 1, 1, (1,))
    assert phi.preimage_ball(Ball(2, 1, 1, (1,))) == Ball.unit(2)
    assert derivative_norm(spec, (Fraction(0),)) == Fraction(1, 2)
    with pytest.raises(ValueError):
        DifferentiableSpec(2, (Fraction(0),), Fraction(1, 3))


def test_derivative_norm_rejects_non_affine_behaviour():
    class Misdeclared(DifferentiableSpec):
        def evaluate(self, x):
            return tuple(3 * c for c in x)

    with pytest.raises(IdentityViolation):
        derivative_norm(Misdeclared(3, (Fraction(0),), Fraction(1)), (Fraction(1),))


def test_apply_point_round_trip():
    iso = make_isometry(5, 1, seed=21)
    x = PAdicVec.from_ints((1234,), 5, precision=8)
    y = iso.apply_point(x)
    assert y.p == 5
    assert invert(iso).apply_point(y).to_fractions() == x.to_fractions()


@pytest.mark.parametrize("seed", range(20))
def test_apply_point_round_trip_through_a_coarse_top(seed):
    iso = make_isometry(2, 1, seed=seed, top_level=-2)
    x = PAdicVec.from_ints((2**15 + 2**14 + 1,), 2, 16)
    y = iso.apply_point(x)
    assert y.absolute_precision == 16
    assert invert(iso).apply_point(y) == x


@pytest.mark.parametrize(
    "morphism",
    [
        make_isometry(3, 1, seed=4, top_level=-2),
        make_dilation(-3, 3),
        make_dilation(2, 3),
        compose(make_dilation(-1, 3), make_isometry(3, 1, seed=9, top_level=-1)),
    ],
)
def test_apply_point_lands_in_the_image_ball(morphism):
    x = PAdicVec.from_ints((2 * 3**7 + 5,), 3, 8)
    level = x.absolute_precision
    y = morphism.apply_point(x)
    assert y.absolute_precision == level + morphism.gamma
    assert ball_from_point(y, level + morphism.gamma) == image_ball(morphism, ball_from_point(x, level))
