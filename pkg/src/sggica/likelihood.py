"""Sufficient statistics, closed-form scale estimators and (profile) log-likelihoods.

For fixed center ``m``, unmixing ``W`` and shape ``c`` the likelihood can be
maximised over the left/right scales in closed form.  What remains is the
profile log-likelihood

    ln L(m, W, c) = (d n / c) ln(kappa n / (c e)) - n (c + 1) / c * ln l(m, W, c)

with kappa = (c / Gamma(1/c))**c and the reduced objective

    ln l = -(c / (c + 1)) ln|det W| + sum_j ln(s1_j**(1/(c+1)) + s2_j**(1/(c+1))),

where s1_j (s2_j) sums |z_ij|**c over samples with z_ij <= 0 (z_ij > 0).
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .density import DET_THRESHOLD, MultiSgg, _positive, multi_sgg_log_pdf
from .errors import DegenerateSideError, DomainError, InsufficientDataError, SingularMatrixError
from .special import beta_of_c, ln_gamma


@dataclass(frozen=True, eq=False)
class SuffStats:
    s1: np.ndarray
    s2: np.ndarray
    g: np.ndarray
    n: int
    c: float
    z: np.ndarray
    """Projected samples, shape (n, d)."""
    left: np.ndarray
    """Boolean (n, d) partition: True where z <= 0 (the left index set)."""

    @property
    def d(self):
        return self.s1.size

    def check_sides(self):
        for j in range(self.d):
            if not self.s1[j] > 0:
                raise DegenerateSideError(j, "left")
            if not self.s2[j] > 0:
                raise DegenerateSideError(j, "right")


class ScaleEstimates(NamedTuple):
    sigma_l: np.ndarray
    sigma_r: np.ndarray
    tau: np.ndarray


def _as_data(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DomainError(f"X must be (n, d), got shape {X.shape}")
    return X


def _as_params(X, m, W):
    d = X.shape[1]
    m = np.atleast_1d(np.asarray(m, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if m.shape != (d,) or W.shape != (d, d):
        raise DomainError(f"expected m ({d},) and W ({d}, {d}), got {m.shape} and {W.shape}")
    return m, W


def log_abs_det(W):
    sign, logdet = np.linalg.slogdet(W)
    if sign == 0 or logdet < math.log(DET_THRESHOLD):
        raise SingularMatrixError("|det W| below threshold")
    return logdet


def sufficient_stats(X, m, W, c):
    X = _as_data(X)
    m, W = _as_params(X, m, W)
    c = _positive(c, "c")
    n = X.shape[0]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    log_abs_det(W)
    z = (X - m) @ W.T
    left = z <= 0
    a = np.abs(z) ** c
    s1 = np.where(left, a, 0.0).sum(axis=0)
    s2 = np.where(left, 0.0, a).sum(axis=0)
    e = 1.0 / (c + 1.0)
    g = s1**e + s2**e
    return SuffStats(s1=s1, s2=s2, g=g, n=n, c=c, z=z, left=left)


def scale_estimators(stats, c=None):
    """Maximum-likelihood left/right scales for the statistics ``stats``.

    Returns ``ScaleEstimates(sigma_l, sigma_r, tau)`` with
    ``sigma_l**c = (c/n) beta**(c/2) s1**(c/(c+1)) g`` and ``tau = (s2/s1)**(1/(c+1))``.
    Raises DegenerateSideError when a side of some component is empty.
    """
    c = stats.c if c is None else _positive(c, "c")
    stats.check_sides()
    n = stats.n
    log_beta = math.log(beta_of_c(c))
    log_sl_c = math.log(c / n) + 0.5 * c * log_beta + (c / (c + 1.0)) * np.log(stats.s1) + np.log(stats.g)
    sigma_l = np.exp(log_sl_c / c)
    tau = np.exp((np.log(stats.s2) - np.log(stats.s1)) / (c + 1.0))
    return ScaleEstimates(sigma_l=sigma_l, sigma_r=sigma_l * tau, tau=tau)


def reduced_objective_l(X, m, W, c):
    """Return ``ln l``; the objective is minimised, and is invariant to row scaling of W."""
    stats = sufficient_stats(X, m, W, c)
    return _ln_l(stats, W)


def _ln_l(stats, W):
    if np.any(stats.g <= 0):
        j = int(np.argmin(stats.g))
        raise DegenerateSideError(j, "both")
    c = stats.c
    return -(c / (c + 1.0)) * log_abs_det(W) + float(np.sum(np.log(stats.g)))


def profile_constant(n, d, c):
    """The ``(d n / c) ln(kappa n / (c e))`` term of the profile log-likelihood."""
    log_kappa = c * (math.log(c) - ln_gamma(1.0 / c))
    return (d * n / c) * (log_kappa + math.log(n) - math.log(c) - 1.0)


def profile_loglik(X, m, W, c):
    """Log-likelihood with the left/right scales maximised out."""
    stats = sufficient_stats(X, m, W, c)
    stats.check_sides()
    return _profile_from_stats(stats, W)


def _profile_from_stats(stats, W):
    c, n, d = stats.c, stats.n, stats.d
    return profile_constant(n, d, c) - n * (c + 1.0) / c * _ln_l(stats, W)


def full_loglik(X, p):
    """Total log-likelihood of the samples under the full model ``p``."""
    X = _as_data(X)
    return float(np.sum(multi_sgg_log_pdf(X, p)))


def fitted_model(X, m, W, c):
    """MultiSgg at (m, W, c) with the closed-form scales plugged in."""
    stats = sufficient_stats(X, m, W, c)
    est = scale_estimators(stats)
    return MultiSgg(m=m, W=W, sigma_l=est.sigma_l, sigma_r=est.sigma_r, c=c)
