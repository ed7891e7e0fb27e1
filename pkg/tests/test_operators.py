import numpy as np
import pytest

from padictree.balls import Ball
from padictree.errors import DivergentKernel, InvalidAction, OutOfDomain, UnsupportedDimension
from padictree.functions import (
    WaveletIndex,
    max_abs_diff,
    omega,
    pushforward,
    random_wavelet_span,
    wavelet,
)
from padictree.morphisms import compose, make_dilation, make_isometry
from padictree.operators import (
    KernelSpec,
    Window,
    constant_field,
    gamma_p,
    kernel_op,
    seeded_field,
    table_field,
    transport_field,
    transport_kernel,
    verify_chain_rule,
    verify_covariance,
    verify_transform_rule,
    vf_op,
    vladimirov,
    vladimirov_kernel,
    wavelet_eigenvalue,
)


def test_gamma_p_and_eigenvalue():
    assert gamma_p(1.0, 2) == pytest.approx(4 / 3)
    assert wavelet_eigenvalue(1.0, 0, 2) == 2.0
    assert wavelet_eigenvalue(2.0, 3, 3) == pytest.approx(3.0**-4)
    with pytest.raises(OutOfDomain):
        gamma_p(0.0, 2)


def test_kernel_spec_table_and_tail():
    kernel = KernelSpec(2, 1, 1.5, 1.0, 0, {Ball.unit(2): 0.75 + 0.25j})
    assert kernel(Ball.unit(2)) == 0.75 + 0.25j
    assert kernel(Ball(2, 1, -1)) == pytest.approx(0.375)
    assert kernel(Ball(2, 1, 0, (0.5,))) == 0
    with pytest.raises(DivergentKernel):
        KernelSpec(2, 1, 1.0, 0.0)
    with pytest.raises(ValueError):
        KernelSpec(2, 1, 1.0, 1.0, None, {Ball.unit(2): 1.0})
    with pytest.raises(ValueError):
        KernelSpec(2, 1, 1.0, 1.0, 1, {Ball.unit(2): 1.0})


def test_window_validation():
    with pytest.raises(ValueError):
        Window(Ball.unit(2), -1)
    w = Window(Ball.unit(2), 2)
    assert w.image(make_dilation(1, 2)) == Window(Ball(2, 1, 1), 3)


@pytest.mark.parametrize("p,alpha,gamma", [(2, 1.0, 0), (3, 0.5, 1), (5, 2.0, -1)])
def test_vladimirov_wavelet_eigenvalue(p, alpha, gamma):
    psi = wavelet(WaveletIndex(gamma, (0,), (1,)), p)
    out = vladimirov(alpha, psi, Window.of(psi))
    expected = psi * wavelet_eigenvalue(alpha, gamma, p)
    assert max_abs_diff(out, expected)[0] < 1e-9 * wavelet_eigenvalue(alpha, gamma, p)


def test_vladimirov_of_unit_indicator():
    out = vladimirov(1.0, omega(2), Window(Ball(2, 1, -1), 0))
    assert np.allclose(out.values, [2 / 3, -1 / 3])
    with pytest.raises(UnsupportedDimension):
        vladimirov(1.0, omega(2, 2), Window.of(omega(2, 2)))


def test_kernel_op_matches_vladimirov():
    f = random_wavelet_span(np.random.default_rng(1), 3, 1, 5)
    w = Window(Ball(3, 1, f.support.level - 1), f.resolution)
    direct = vladimirov(1.5, f, w)
    generic = kernel_op(vladimirov_kernel(1.5, 3), f, w)
    assert max_abs_diff(direct, generic)[0] < 1e-9


def test_vector_field_operator_reduces_to_kernel_operator_in_one_dimension():
    f = random_wavelet_span(np.random.default_rng(2), 3, 1, 4)
    kernel = vladimirov_kernel(1.0, 3)
    w = Window.of(f)
    out = vf_op(kernel, constant_field((1,), 3, 1), f, w)
    assert max_abs_diff(out, kernel_op(kernel, f, w))[0] < 1e-9


def test_vector_fields():
    field = seeded_field(5, 3, 2)
    ball = Ball(3, 2, 1, (1, 2))
    assert field(ball) == seeded_field(5, 3, 2)(ball)
    assert any(field(ball))
    with pytest.raises(InvalidAction):
        table_field({}, (0, 0), 3, 2)(ball)
    phi = make_isometry(3, 1, seed=1)
    assert transport_field(constant_field((2,), 3, 1), phi)(Ball.unit(3)) == (1,)


def test_transport_kernel_shifts_the_tail():
    kernel = vladimirov_kernel(1.0, 2)
    moved = transport_kernel(kernel, make_dilation(1, 2))
    for level in (-3, 0, 2):
        ball = Ball(2, 1, level)
        assert moved(ball) == pytest.approx(kernel(make_dilation(1, 2).image_ball(ball)))


def test_chain_rule_for_dilation_and_isometry():
    f = random_wavelet_span(np.random.default_rng(4), 2, 1, 4)
    phi = compose(make_dilation(1, 2), make_isometry(2, 1, seed=3, top_level=-3))
    w = Window.of(pushforward(phi, f))
    assert verify_chain_rule(phi, 0.5, f, w).max_abs_diff < 1e-9


def test_transform_rule_and_negative_control():
    f = random_wavelet_span(np.random.default_rng(5), 3, 1, 3)
    phi = make_dilation(1, 3)
    kernel = vladimirov_kernel(1.0, 3)
    w = Window.of(pushforward(phi, f))
    assert verify_transform_rule(phi, kernel, f, w).max_abs_diff < 1e-9
    broken = verify_transform_rule(phi, kernel, f, w, negative_control=True)
    assert broken.max_abs_diff > 1e-6
    assert broken.argmax_cell is not None


def test_covariance_under_affine_isometry():
    rng = np.random.default_rng(6)
    f = random_wavelet_span(rng, 3, 2, 2, gammas=(0,))
    phi = make_isometry(3, 2, seed=4, mode="affine", top_level=-2)
    kernel = vladimirov_kernel(1.0, 3, 2)
    w = Window.of(pushforward(phi, f))
    assert verify_covariance(phi, kernel, seeded_field(8, 3, 2), f, w).max_abs_diff < 1e-9
    with pytest.raises(ValueError):
        verify_covariance(make_dilation(1, 3, 2), kernel, seeded_field(8, 3, 2), f, w)
