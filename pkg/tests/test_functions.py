from fractions import Fraction

import numpy as np
import pytest

from padictree.balls import Ball
from padictree.errors import InvalidIndex, MissingCells, UnsupportedDimension
from padictree.functions import (
    LCFunction,
    WaveletIndex,
    ball_integral,
    ball_orbit_functions,
    cell_from_path,
    cell_path,
    coarsen,
    evaluate,
    extend_support,
    factor_as_wavelet,
    frame_coefficients,
    frame_partial_sum,
    frame_partial_sums_by_level,
    indicator,
    inner,
    integral,
    l2norm,
    make_function,
    max_abs_diff,
    omega,
    pushforward,
    random_wavelet_span,
    refine,
    restrict,
    sqrt_p_exponent,
    tabulate,
    translate,
    unitary_action,
    wavelet,
)
from padictree.morphisms import compose, make_dilation, make_isometry


def test_wavelet_values_and_norm():
    psi = wavelet(WaveletIndex(0, (0,), (1,)), 2)
    assert psi.support == Ball.unit(2)
    assert np.allclose(psi.values, [1, -1])
    assert evaluate(psi, (Fraction(1),)) == pytest.approx(-1)
    assert evaluate(psi, (Fraction(1, 2),)) == 0
    coarse = wavelet(WaveletIndex(1, (Fraction(1, 2),), (1,)), 2)
    assert coarse.support == Ball(2, 1, -1, (Fraction(1, 4),))
    assert l2norm(coarse) == pytest.approx(1.0)
    assert abs(integral(coarse)) < 1e-15


def test_wavelets_are_orthonormal():
    first = wavelet(WaveletIndex(0, (0,), (1,)), 3)
    second = wavelet(WaveletIndex(0, (0,), (2,)), 3)
    third = wavelet(WaveletIndex(1, (0,), (1,)), 3)
    assert inner(first, first) == pytest.approx(1)
    assert abs(inner(first, second)) < 1e-12
    assert abs(inner(first, third)) < 1e-12


def test_wavelet_rejects_bad_indices():
    with pytest.raises(InvalidIndex):
        wavelet(WaveletIndex(0, (0,), (2,)), 2)
    with pytest.raises(InvalidIndex):
        wavelet(WaveletIndex(0, (Fraction(1, 3),), (1,)), 2)
    with pytest.raises(InvalidIndex):
        WaveletIndex(0, (0, 0), (1,))


def test_tables_must_be_complete():
    with pytest.raises(MissingCells):
        LCFunction(Ball.unit(2), 1, np.zeros(3))
    with pytest.raises(MissingCells):
        make_function(Ball.unit(2), 1, {Ball(2, 1, 1, (0,)): 1.0})
    f = make_function(Ball.unit(2), 1, {Ball(2, 1, 1, (0,)): 1.0, Ball(2, 1, 1, (1,)): 2.0})
    assert np.allclose(f.values, [1, 2])


def test_integrals_over_balls():
    f = omega(3)
    assert ball_integral(f, Ball(3, 1, 1, (1,))) == pytest.approx(1 / 3)
    assert ball_integral(f, Ball(3, 1, -2)) == pytest.approx(1)
    assert ball_integral(f, Ball(3, 1, 0, (Fraction(1, 3),))) == 0
    assert integral(refine(f, 2)) == pytest.approx(1)


def test_support_changes_keep_values():
    wide = extend_support(omega(2), Ball(2, 1, -1))
    assert np.allclose(wide.values, [1, 0])
    total = omega(2) + indicator(Ball(2, 1, 1, (1,)))
    assert evaluate(total, (Fraction(1),)) == pytest.approx(2)
    assert evaluate(total, (Fraction(0),)) == pytest.approx(1)
    assert max_abs_diff(omega(2), refine(omega(2), 3)) == (0.0, None)
    assert evaluate(restrict(omega(2), Ball(2, 1, 1, (1,))), (Fraction(3),)) == pytest.approx(1)


def test_coarsen_and_cell_paths():
    fine = refine(omega(2), 3)
    assert np.allclose(coarsen(fine, 0).values, [1])
    psi = wavelet(WaveletIndex(0, (0,), (1,)), 2)
    assert coarsen(psi, 0) is None
    cell = Ball(3, 1, 2, (5,))
    assert cell_path(Ball.unit(3), cell) == [2, 1]
    assert cell_from_path(Ball.unit(3), [2, 1]) == cell
    f = tabulate(Ball.unit(2), 1, lambda ball: float(ball.center[0]))
    assert np.allclose(f.values, [0, 1])


def test_pushforward_under_dilation():
    phi = make_dilation(1, 2)
    moved = pushforward(phi, omega(2))
    assert moved.support == Ball(2, 1, -1)
    assert l2norm(moved) == pytest.approx(2**0.5)
    assert l2norm(unitary_action(phi, omega(2))) == pytest.approx(1.0)


def test_pushforward_respects_composition():
    f = random_wavelet_span(np.random.default_rng(3), 3, 1, 4)
    first = make_isometry(3, 1, seed=2, top_level=-2)
    second = make_dilation(1, 3)
    together = pushforward(compose(first, second), f)
    stepwise = pushforward(second, pushforward(first, f))
    assert max_abs_diff(together, stepwise)[0] < 1e-12


def test_isometries_preserve_norm_and_integral():
    f = random_wavelet_span(np.random.default_rng(0), 3, 1, 4)
    phi = make_isometry(3, 1, seed=2, top_level=-2)
    moved = unitary_action(phi, f)
    assert l2norm(moved) == pytest.approx(l2norm(f))
    assert integral(moved) == pytest.approx(integral(f), abs=1e-12)


def test_translate_moves_the_support():
    f = translate(indicator(Ball(2, 1, 1, (0,))), (1,))
    assert evaluate(f, (Fraction(1),)) == pytest.approx(1)
    assert evaluate(f, (Fraction(0),)) == 0


def test_orbit_functions():
    orbit = ball_orbit_functions(Ball.unit(3))
    assert len(orbit) == 6
    assert all(l2norm(g) == pytest.approx(1.0) for g in orbit)
    with pytest.raises(UnsupportedDimension):
        ball_orbit_functions(Ball.unit(3, 2))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_frame_partial_sum_of_unit_indicator(p):
    partial, tail = frame_partial_sum(omega(p), 30)
    expected = {2: 2.0, 3: 3.0, 5: 30.0}[p]
    assert abs(partial - expected) <= tail + 1e-9


def test_frame_sum_of_a_wavelet():
    psi = wavelet(WaveletIndex(0, (0,), (1,)), 2)
    coefficients = frame_coefficients(psi, 20)
    assert list(coefficients) == [Ball.unit(2)]
    assert np.allclose(np.abs(coefficients[Ball.unit(2)]), [1, 1])
    assert frame_partial_sum(psi, 20)[0] == pytest.approx(2.0)


def test_frame_law_per_level():
    rows = frame_partial_sums_by_level(omega(2), 5)
    assert [gamma for gamma, _, _ in rows] == [5, 4, 3, 2, 1]
    assert rows[-1][1] == pytest.approx(1.0)
    assert rows[-1][2] == pytest.approx(2 - 2**-4)
    for ball, coeffs in frame_coefficients(omega(3), 6).items():
        assert {sqrt_p_exponent(abs(c), 3) for c in coeffs} == {ball.level}


def test_sqrt_p_exponent():
    assert sqrt_p_exponent(2**-1.5, 2) == -3
    assert sqrt_p_exponent(3.0, 3) == 2
    assert sqrt_p_exponent(5.0, 2) is None
    assert sqrt_p_exponent(0.0, 2) is None


def test_factor_as_wavelet():
    psi = wavelet(WaveletIndex(1, (Fraction(1, 3),), (2,)), 3)
    found = factor_as_wavelet(psi * (2 + 1j))
    assert found is not None
    c, index = found
    assert c == pytest.approx(2 + 1j)
    assert index == WaveletIndex(1, (Fraction(1, 3),), (2,))
    wide = extend_support(psi, Ball(3, 1, -3))
    assert factor_as_wavelet(wide)[1] == index
    assert factor_as_wavelet(omega(2)) is None
    assert factor_as_wavelet(omega(2) * 0) is None
