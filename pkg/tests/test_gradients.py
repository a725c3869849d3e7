import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sggica.errors import DegenerateSideError, SingularMatrixError
from sggica.gradients import (
    GradientBundle,
    dc_ln_l,
    finite_diff,
    grad_ln_l,
    grad_m_ln_l,
    grad_profile_loglik,
    grad_W_ln_l,
    inverse_transpose,
    profile_loglik_and_grad,
)
from sggica.likelihood import profile_loglik, reduced_objective_l

from conftest import random_instance


def rel_err(a, b):
    a, b = a.flat(), b.flat()
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


def ln_l_field(X):
    return lambda m, W, c: reduced_objective_l(X, m, W, c)


def profile_field(X):
    return lambda m, W, c: profile_loglik(X, m, W, c)


@pytest.mark.parametrize("seed", range(12))
def test_ln_l_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    d = [1, 2, 3, 5][seed % 4]
    X, m, W, c = random_instance(rng, 200, d, rng.uniform(0.7, 4.0))
    assert rel_err(grad_ln_l(X, m, W, c), finite_diff(ln_l_field(X), m, W, c)) < 1e-5


@pytest.mark.parametrize("seed", range(12))
def test_profile_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(100 + seed)
    d = [1, 2, 3, 5][seed % 4]
    X, m, W, c = random_instance(rng, 200, d, rng.uniform(0.7, 4.0))
    assert rel_err(grad_profile_loglik(X, m, W, c), finite_diff(profile_field(X), m, W, c)) < 1e-5


def test_component_functions_agree_with_bundle():
    rng = np.random.default_rng(9)
    X, m, W, c = random_instance(rng, 80, 3, 1.3)
    b = grad_ln_l(X, m, W, c)
    np.testing.assert_array_equal(grad_m_ln_l(X, m, W, c), b.d_m)
    np.testing.assert_array_equal(grad_W_ln_l(X, m, W, c), b.d_W)
    assert dc_ln_l(X, m, W, c) == b.d_c


def test_value_and_gradient_share_value():
    rng = np.random.default_rng(10)
    X, m, W, c = random_instance(rng, 80, 2, 2.2)
    value, _ = profile_loglik_and_grad(X, m, W, c)
    assert value == pytest.approx(profile_loglik(X, m, W, c), abs=1e-10)


def test_profile_gradient_is_scaled_ln_l_gradient_in_m_and_W():
    rng = np.random.default_rng(11)
    X, m, W, c = random_instance(rng, 90, 2, 1.8)
    n = X.shape[0]
    a, b = grad_ln_l(X, m, W, c), grad_profile_loglik(X, m, W, c)
    np.testing.assert_allclose(b.d_m, -n * (c + 1) / c * a.d_m, rtol=1e-12)
    np.testing.assert_allclose(b.d_W, -n * (c + 1) / c * a.d_W, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), d=st.integers(1, 4), c=st.floats(0.6, 5.0))
def test_row_scaling_is_a_flat_direction(seed, d, c):
    rng = np.random.default_rng(seed)
    X, m, W, _ = random_instance(rng, 60, d, c)
    G = grad_W_ln_l(X, m, W, c)
    # d/dt ln l(m, (I + t E_pp) W) = <G, E_pp W> = row p of G dotted with row p of W
    np.testing.assert_allclose(np.sum(G * W, axis=1), 0.0, atol=1e-8)


def test_permutation_equivariance():
    rng = np.random.default_rng(12)
    X, m, W, c = random_instance(rng, 70, 3, 1.5)
    P = np.eye(3)[[1, 2, 0]]
    a = grad_ln_l(X, m, W, c)
    b = grad_ln_l(X, m, P @ W, c)
    np.testing.assert_allclose(b.d_W, P @ a.d_W, atol=1e-12)
    np.testing.assert_allclose(b.d_m, a.d_m, atol=1e-12)
    assert b.d_c == pytest.approx(a.d_c, abs=1e-12)


def test_duplicated_samples_double_profile_gradient_in_m_and_W():
    rng = np.random.default_rng(13)
    X, m, W, c = random_instance(rng, 50, 2, 1.2)
    a = grad_profile_loglik(X, m, W, c)
    b = grad_profile_loglik(np.vstack([X, X]), m, W, c)
    np.testing.assert_allclose(b.d_m, 2 * a.d_m, rtol=1e-10)
    np.testing.assert_allclose(b.d_W, 2 * a.d_W, rtol=1e-10)


def test_zero_gradient_in_m_at_symmetric_gaussian_center():
    x = np.array([-2.0, -1.0, 1.0, 2.0])
    g = grad_ln_l(x, [0.0], [[1.0]], 2.0)
    assert g.d_m[0] == pytest.approx(0.0, abs=1e-14)
    assert g.d_W[0, 0] == pytest.approx(0.0, abs=1e-14)


def test_sample_on_split_point_is_finite_for_small_c():
    x = np.array([-2.0, 0.0, 1.0, 3.0])
    g = grad_ln_l(x, [0.0], [[1.0]], 0.6)
    assert np.all(np.isfinite(g.flat()))


def test_one_dimensional_W_derivative_against_scalar_oracle():
    x = np.array([-1.0, 1.0])

    def ln_l(w):
        # -(2/3) ln|w| + ln g(w) written out directly for c = 2
        s1 = s2 = w**2
        return -(2 / 3) * math.log(abs(w)) + math.log(s1 ** (1 / 3) + s2 ** (1 / 3))

    h = 1e-6
    fd = (ln_l(1 + h) - ln_l(1 - h)) / (2 * h)
    assert grad_W_ln_l(x, [0.0], [[1.0]], 2.0)[0, 0] == pytest.approx(fd, abs=1e-8)


@pytest.mark.parametrize("c", [0.8, 1.5, 3.0])
def test_dc_with_unit_magnitudes(c):
    x = np.array([-1.0, -1.0, -1.0, 1.0, 1.0])
    s1, s2 = 3.0, 2.0
    e = 1 / (c + 1)
    g = s1**e + s2**e
    expected = -(math.log(s1) * s1**e + math.log(s2) * s2**e) / ((c + 1) ** 2 * g)
    assert dc_ln_l(x, [0.0], [[1.0]], c) == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("c", [0.8, 1.5, 3.0])
def test_dc_matches_finite_difference(c):
    rng = np.random.default_rng(int(10 * c))
    X, m, W, _ = random_instance(rng, 200, 2, c)
    h = 1e-6
    fd = (reduced_objective_l(X, m, W, c + h) - reduced_objective_l(X, m, W, c - h)) / (2 * h)
    assert dc_ln_l(X, m, W, c) == pytest.approx(fd, rel=1e-5)


def test_errors():
    with pytest.raises(DegenerateSideError):
        grad_ln_l(np.array([1.0, 2.0, 3.0]), [0.0], [[1.0]], 1.5)
    with pytest.raises(SingularMatrixError):
        inverse_transpose(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]]))


def test_inverse_transpose():
    W = np.array([[2.0, 1.0], [0.5, 3.0]])
    np.testing.assert_allclose(inverse_transpose(W) @ W.T, np.eye(2), atol=1e-14)


class TestFiniteDiff:
    def test_quadratic_is_exact(self):
        A = np.array([[1.0, 2.0], [0.5, -1.0]])

        def f(m, W, c):
            return float(m @ m + np.sum(A * W) + 3 * c**2)

        m = np.array([0.3, -0.2])
        g = finite_diff(f, m, np.eye(2), 1.5, h=1e-4)
        np.testing.assert_allclose(g.d_m, 2 * m, atol=1e-9)
        np.testing.assert_allclose(g.d_W, A, atol=1e-9)
        assert g.d_c == pytest.approx(9.0, abs=1e-8)

    def test_square_is_accurate(self):
        g = finite_diff(lambda m, W, c: float(m[0] ** 2), np.array([0.7]), np.eye(1), 1.0, h=1e-4)
        assert g.d_m[0] == pytest.approx(1.4, rel=1e-8)

    def test_log_det_at_identity(self):
        g = finite_diff(lambda m, W, c: math.log(abs(np.linalg.det(W))), np.zeros(3), np.eye(3), 1.0)
        np.testing.assert_allclose(g.d_W, np.eye(3), atol=1e-6)

    def test_second_order_convergence(self):
        f = lambda m, W, c: math.exp(2 * c) + math.sin(m[0])
        errs = []
        for h in (1e-2, 5e-3):
            g = finite_diff(f, np.array([0.3]), np.eye(1), 0.4, h=h)
            errs.append(abs(g.d_c - 2 * math.exp(0.8)))
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_bundle_helpers(self):
        b = GradientBundle(np.array([1.0]), np.array([[2.0]]), 3.0)
        np.testing.assert_array_equal(b.flat(), [1.0, 2.0, 3.0])
        np.testing.assert_array_equal((2 * b).flat(), [2.0, 4.0, 6.0])
