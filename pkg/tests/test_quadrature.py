import numpy as np
import pytest

from padictree.balls import Ball
from padictree.errors import UnsupportedDimension
from padictree.functions import WaveletIndex, max_abs_diff, omega, random_wavelet_span, wavelet
from padictree.operators import Window, seeded_field, vf_op, vladimirov, vladimirov_kernel
from padictree.quadrature import completion_basis, quadrature_vladimirov, vector_field_oracle


@pytest.mark.parametrize("p,alpha", [(2, 1.0), (3, 0.5), (5, 2.0)])
def test_oracle_matches_vladimirov_on_wavelets(p, alpha):
    psi = wavelet(WaveletIndex(0, (0,), (1,)), p)
    w = Window.of(psi)
    oracle = quadrature_vladimirov(alpha, psi, w, extra=2)
    assert max_abs_diff(oracle, vladimirov(alpha, psi, w))[0] < 1e-9


def test_oracle_outside_the_support():
    w = Window(Ball(2, 1, -1), 0)
    oracle = quadrature_vladimirov(1.0, omega(2), w, extra=3)
    assert np.allclose(oracle.values, [2 / 3, -1 / 3])
    with pytest.raises(UnsupportedDimension):
        quadrature_vladimirov(1.0, omega(2, 2), Window.of(omega(2, 2)))


def test_completion_bases():
    assert completion_basis((0, 2), 3, "A") == [(0, 2), (3, 0)]
    first, rest = completion_basis((1, 1), 2, "B")
    assert first == (3, 1)
    assert rest == (6, 4)
    with pytest.raises(ValueError):
        completion_basis((1, 1), 2, "C")


@pytest.mark.parametrize("variant", ["A", "B"])
def test_vector_field_oracle_agrees_with_operator(variant):
    f = random_wavelet_span(np.random.default_rng(7), 3, 2, 2, gammas=(0,))
    kernel = vladimirov_kernel(1.0, 3, 2)
    field = seeded_field(2, 3, 2)
    w = Window.of(f)
    oracle = vector_field_oracle(kernel, field, f, w, variant)
    assert max_abs_diff(oracle, vf_op(kernel, field, f, w))[0] < 1e-9
