"""Analytic gradients of ln l and of the profile log-likelihood in (m, W, c)."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError
from .likelihood import _as_data, _as_params, _ln_l, log_abs_det, profile_constant, sufficient_stats
from .special import digamma

EPS_GRAD = 1e-12
COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class GradientBundle:
    d_m: np.ndarray
    d_W: np.ndarray
    d_c: float

    def flat(self):
        return np.concatenate([self.d_m.ravel(), self.d_W.ravel(), [self.d_c]])

    def __mul__(self, k):
        return GradientBundle(self.d_m * k, self.d_W * k, self.d_c * k)

    __rmul__ = __mul__


def inverse_transpose(W):
    """(W^-1)^T via LU; rejects effectively singular W."""
    log_abs_det(W)
    if np.linalg.cond(W) > COND_LIMIT:
        raise SingularMatrixError("W is numerically singular (condition number > 1e12)")
    return np.linalg.inv(W).T


class _Terms:
    """Shared intermediates of the three partial derivatives."""

    def __init__(self, X, m, W, c):
        X = _as_data(X)
        m, W = _as_params(X, m, W)
        self.X, self.m, self.W = X, m, W
        self.stats = st = sufficient_stats(X, m, W, c)
        st.check_sides()
        self.c = c = st.c
        self.k = c / (c + 1.0)
        absz = np.abs(st.z)
        # |z|^(c-1) is singular at 0 when c < 1; floor inside gradient sums only
        pw = np.maximum(absz, EPS_GRAD) ** (c - 1.0)
        a1 = st.s1 ** -self.k
        a2 = st.s2 ** -self.k
        # q_ij = |z_ij|^(c-1) * (a1_j on the left, -a2_j on the right) / g_j
        self.q = pw * np.where(st.left, a1, -a2) / st.g

    def grad_m(self):
        return self.k * (self.q.sum(axis=0) @ self.W)

    def grad_W(self):
        return -self.k * (inverse_transpose(self.W) + self.q.T @ (self.X - self.m))

    def d_c(self):
        st, c = self.stats, self.c
        absz = np.abs(st.z)
        with np.errstate(divide="ignore", invalid="ignore"):
            zlog = np.where(absz > 0, absz**c * np.log(absz), 0.0)
        ds1 = np.where(st.left, zlog, 0.0).sum(axis=0)
        ds2 = np.where(st.left, 0.0, zlog).sum(axis=0)
        e = 1.0 / (c + 1.0)
        inner = (
            e * st.s1 ** -self.k * ds1 - st.s1**e * np.log(st.s1) * e * e
            + e * st.s2 ** -self.k * ds2 - st.s2**e * np.log(st.s2) * e * e
        )
        return float(-log_abs_det(self.W) * e * e + np.sum(inner / st.g))


def grad_m_ln_l(X, m, W, c):
    return _Terms(X, m, W, c).grad_m()


def grad_W_ln_l(X, m, W, c):
    return _Terms(X, m, W, c).grad_W()


def dc_ln_l(X, m, W, c):
    return _Terms(X, m, W, c).d_c()


def grad_ln_l(X, m, W, c):
    t = _Terms(X, m, W, c)
    return GradientBundle(t.grad_m(), t.grad_W(), t.d_c())


def profile_loglik_and_grad(X, m, W, c):
    """Return ``(ln L, GradientBundle)`` sharing one pass over the data."""
    t = _Terms(X, m, W, c)
    st = t.stats
    n, d, c = st.n, st.d, t.c
    ln_l = _ln_l(st, t.W)
    factor = -n * (c + 1.0) / c
    value = profile_constant(n, d, c) + factor * ln_l
    d_c = (
        (d * n / c**2) * (math.log(c * math.e / n) - 1.0 + c + digamma(1.0 / c))
        + (n / c**2) * ln_l
        + factor * t.d_c()
    )
    return value, GradientBundle(factor * t.grad_m(), factor * t.grad_W(), float(d_c))


def grad_profile_loglik(X, m, W, c):
    return profile_loglik_and_grad(X, m, W, c)[1]


def finite_diff(f, m, W, c, h=1e-6):
    """Central-difference GradientBundle of the scalar field ``f(m, W, c)``."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    c = float(c)
    d_m = np.empty_like(m)
    for k in range(m.size):
        e = np.zeros_like(m)
        e[k] = h
        d_m[k] = (f(m + e, W, c) - f(m - e, W, c)) / (2 * h)
    d_W = np.empty_like(W)
    for idx in np.ndindex(W.shape):
        E = np.zeros_like(W)
        E[idx] = h
        d_W[idx] = (f(m, W + E, c) - f(m, W - E, c)) / (2 * h)
    d_c = (f(m, W, c + h) - f(m, W, c - h)) / (2 * h)
    return GradientBundle(d_m, d_W, float(d_c))
