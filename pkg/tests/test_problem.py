import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from stochheat.grid_spectral import GridSpec
from stochheat.problem import (
    BuiltinProblem, Problem, QuadratureError, eval_u0_on_grid, get_problem, heat_only,
    lipschitz_probe, sine_coefficients, sobolev_norm,
)
from stochheat.schemes import SolverState, diffusion_scaled, drift_vector


def _phi1(x):
    return np.sqrt(2.0) * np.sin(np.pi * np.asarray(x))


def _hat(x):
    return np.minimum(x, 1 - np.asarray(x))


def test_builtin_labels():
    for p in BuiltinProblem:
        assert get_problem(p.value).label == p.value
    assert get_problem("STRONG-TEST").label == "strong_test"
    with pytest.raises(ValueError, match="strong_test"):
        get_problem("strong")
    assert not get_problem("nonlip_demo").lipschitz


def test_u0_must_vanish_on_boundary():
    with pytest.raises(ValueError):
        Problem(f=lambda t, x, u: u, sigma=lambda t, x, u: u, u0=lambda x: np.ones_like(x))


def test_u0_on_grid():
    u = eval_u0_on_grid(get_problem("strong_test"), GridSpec(2, 1, 1.0))
    np.testing.assert_allclose(u, [1.0], atol=1e-15)
    u = eval_u0_on_grid(heat_only(_phi1), GridSpec(4, 1, 1.0))
    np.testing.assert_allclose(u, [1.0, np.sqrt(2.0), 1.0], atol=1e-15)
    u = eval_u0_on_grid(heat_only(lambda x: 0 * x), GridSpec(4, 1, 1.0))
    assert np.array_equal(u, np.zeros(3))


def _state(U):
    return SolverState(0, np.asarray(U, dtype=float), 0.0)


def test_drift_examples():
    x = np.array([0.25, 0.5])
    p = get_problem("strong_test")
    np.testing.assert_array_equal(drift_vector(p, _state([2.0, 4.0]), x), [1.0, 2.0])
    np.testing.assert_array_equal(drift_vector(heat_only(), _state([2.0, 4.0]), x), [0.0, 0.0])
    np.testing.assert_array_equal(drift_vector(get_problem("as_test"), _state([0.0, 0.0]), x), [1.0, 1.0])


def test_diffusion_examples():
    x = np.array([0.25, 0.5, 0.75])
    dW = np.array([0.1, -0.2, 0.3])
    np.testing.assert_array_equal(diffusion_scaled(heat_only(), _state([1, 2, 3]), dW, 4, x), np.zeros(3))
    ones = Problem(f=lambda t, x, u: 0 * u, sigma=lambda t, x, u: 1 + 0 * u, u0=_phi1)
    np.testing.assert_allclose(diffusion_scaled(ones, _state([5, 5, 5]), dW, 4, x), 2 * dW, rtol=1e-15)
    p = get_problem("strong_test")
    np.testing.assert_array_equal(diffusion_scaled(p, _state([1, 1, 1]), dW, 4, x), np.zeros(3))
    with pytest.raises(ValueError):
        diffusion_scaled(p, _state([1, 1]), dW, 4, x)


def test_lipschitz_probe():
    lf, ls = lipschitz_probe(get_problem("strong_test"))
    assert lf == pytest.approx(0.5) and ls == pytest.approx(1.0)
    lf, _ = lipschitz_probe(get_problem("nonlip_demo"))
    assert lf > 100


def test_sine_coefficients_against_quad():
    c = sine_coefficients(_hat, 8)
    for j in (1, 2, 3, 5):
        ref = integrate.quad(lambda x: _hat(x) * np.sqrt(2) * np.sin(j * np.pi * x), 0, 1,
                             points=[0.5], limit=200)[0]
        assert c[j - 1] == pytest.approx(ref, abs=1e-5)


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 2.5])
def test_sobolev_norm_of_phi1(beta):
    assert sobolev_norm(_phi1, beta, 32) == pytest.approx(2 ** (beta / 2), abs=1e-8)


def test_sobolev_norm_zero():
    assert sobolev_norm(lambda x: 0 * x, 1.0, 16) == 0.0


def test_sobolev_norm_strong_test_datum():
    # u0 = sin(pi x) = phi_1 / sqrt(2): norm sqrt(2^beta / 2), which is 1 at beta = 1
    oracle = math.sqrt(2.0 * integrate.quad(lambda x: np.sin(np.pi * x) * _phi1(x), 0, 1)[0] ** 2)
    u0 = get_problem("strong_test").u0
    a = sobolev_norm(u0, 1.0, 10_000)
    b = sobolev_norm(u0, 1.0, 20_000)
    assert a == pytest.approx(oracle, abs=1e-8)
    assert abs(a - b) < 1e-6


def test_hat_norm_diverges_above_three_halves():
    grow_low = sobolev_norm(_hat, 1.0, 1024) / sobolev_norm(_hat, 1.0, 256)
    grow_high = sobolev_norm(_hat, 1.6, 1024) / sobolev_norm(_hat, 1.6, 256)
    assert grow_low < 1.001
    assert grow_high > 1.1


def test_quadrature_failures():
    with pytest.raises(QuadratureError):
        sobolev_norm(lambda x: np.where(x > 0, 1 / np.sqrt(np.abs(x - 0.3)), 0.0), 0.5, 8)
    with pytest.raises(ValueError):
        sine_coefficients(_phi1, 0)
    with pytest.raises(ValueError):
        sine_coefficients(_phi1, 4, panels=16)


@settings(max_examples=25, deadline=None)
@given(j=st.integers(1, 20), beta=st.floats(0, 3))
def test_single_mode_norm(j, beta):
    u0 = lambda x: np.sqrt(2.0) * np.sin(j * np.pi * np.asarray(x))
    assert sobolev_norm(u0, beta, 24) == pytest.approx((1 + j * j) ** (beta / 2), rel=1e-9)
