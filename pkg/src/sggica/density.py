"""Split generalized Gaussian densities and the univariate comparison families.

Throughout, ``W`` holds projection directions as *rows*: component ``j`` of
an observation ``x`` is ``z_j = W[j] @ (x - m)``.  A value sitting exactly
on the split point belongs to the left branch.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._rng import CounterRng
from .errors import DomainError, SingularMatrixError
from .special import beta_of_c, ln_gamma

DET_THRESHOLD = 1e-12


def _positive(value, name):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class UnivariateSgg:
    m: float
    sigma_l: float
    sigma_r: float
    c: float

    def __post_init__(self):
        if not math.isfinite(self.m):
            raise DomainError(f"m must be finite, got {self.m!r}")
        _positive(self.sigma_l, "sigma_l")
        _positive(self.sigma_r, "sigma_r")
        _positive(self.c, "c")

    @property
    def alpha_l(self):
        return alpha_from_sigma(self.sigma_l, self.c)

    @property
    def alpha_r(self):
        return alpha_from_sigma(self.sigma_r, self.c)


@dataclass(frozen=True, eq=False)
class MultiSgg:
    """d-dimensional product model ``|det W| * prod_j SGG(W[j] @ (x - m))``."""

    m: np.ndarray
    W: np.ndarray
    sigma_l: np.ndarray
    sigma_r: np.ndarray
    c: float

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        sl = np.atleast_1d(np.asarray(self.sigma_l, dtype=float))
        sr = np.atleast_1d(np.asarray(self.sigma_r, dtype=float))
        d = m.size
        if W.shape != (d, d) or sl.shape != (d,) or sr.shape != (d,):
            raise DomainError(
                f"inconsistent dimensions: m {m.shape}, W {W.shape}, "
                f"sigma_l {sl.shape}, sigma_r {sr.shape}"
            )
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(W))):
            raise DomainError("m and W must be finite")
        if not (np.all(sl > 0) and np.all(sr > 0) and np.all(np.isfinite(sl)) and np.all(np.isfinite(sr))):
            raise DomainError("scale vectors must be finite and strictly positive")
        _positive(self.c, "c")
        if abs(np.linalg.det(W)) < DET_THRESHOLD:
            raise SingularMatrixError("|det W| below threshold")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "sigma_l", sl)
        object.__setattr__(self, "sigma_r", sr)
        object.__setattr__(self, "c", float(self.c))

    @property
    def d(self):
        return self.m.size


def alpha_from_sigma(sigma, c):
    """Convert a standard-deviation scale to the exponent scale ``sigma / sqrt(beta(c))``.

    Accepts scalars or arrays for ``sigma``.
    """
    c = _positive(c, "c")
    sigma_arr = np.asarray(sigma, dtype=float)
    if np.any(~(sigma_arr > 0)) or not np.all(np.isfinite(sigma_arr)):
        raise DomainError("sigma must be finite and > 0")
    alpha = sigma_arr / math.sqrt(beta_of_c(c))
    return float(alpha) if alpha.ndim == 0 else alpha


def _sgg_log_pdf(t, alpha_l, alpha_r, c):
    # t = x - m; arrays broadcast over t
    log_norm = math.log(c) - np.log(alpha_l + alpha_r) - ln_gamma(1.0 / c)
    alpha = np.where(t <= 0, alpha_l, alpha_r)
    return log_norm - (np.abs(t) / alpha) ** c


def sgg_log_pdf(x, p):
    """Log density of a univariate SGG; vectorised over ``x``."""
    t = np.asarray(x, dtype=float) - p.m
    out = _sgg_log_pdf(t, p.alpha_l, p.alpha_r, p.c)
    return float(out) if out.ndim == 0 else out


def multi_sgg_log_pdf(x, p):
    """Log density of the multivariate model at one point (d,) or many (n, d)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    X = x.reshape(1, -1) if single else x
    if X.ndim != 2 or X.shape[1] != p.d:
        raise DomainError(f"expected {p.d} coordinates, got {X.shape[1]}")
    Z = (X - p.m) @ p.W.T
    alpha_l = alpha_from_sigma(p.sigma_l, p.c)
    alpha_r = alpha_from_sigma(p.sigma_r, p.c)
    _, logdet = np.linalg.slogdet(p.W)
    out = logdet + _sgg_log_pdf(Z, alpha_l, alpha_r, p.c).sum(axis=1)
    return float(out[0]) if single else out


def logistic_log_pdf(x, mu, s):
    """Log of ``sech^2((x - mu) / (2 s)) / (4 s)``; vectorised over ``x``."""
    s = _positive(s, "s")
    t = np.abs((np.asarray(x, dtype=float) - mu) / s)
    out = -t - 2.0 * np.log1p(np.exp(-t)) - math.log(s)
    return float(out) if out.ndim == 0 else out


def split_normal_log_pdf(x, m, sigma, tau):
    """Two-piece normal: variance sigma**2 left of ``m``, (tau * sigma)**2 right of it."""
    sigma = _positive(sigma, "sigma")
    tau = _positive(tau, "tau")
    t = np.asarray(x, dtype=float) - m
    log_norm = 0.5 * math.log(2.0 / math.pi) - math.log(sigma) - math.log1p(tau)
    scale = np.where(t <= 0, sigma, tau * sigma)
    out = log_norm - 0.5 * (t / scale) ** 2
    return float(out) if out.ndim == 0 else out


def sample_sgg(p, n, seed):
    """Draw ``n`` i.i.d. values from ``p``; deterministic in ``seed``.

    The side is chosen with probability alpha_l / (alpha_l + alpha_r) for
    the left half, and the distance from the mode is ``alpha * G**(1/c)``
    with ``G ~ Gamma(1/c)``.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = CounterRng(seed)
    alpha_l, alpha_r = p.alpha_l, p.alpha_r
    left = rng.uniform(n) < alpha_l / (alpha_l + alpha_r)
    g = rng.gamma(1.0 / p.c, n)
    mag = np.where(left, alpha_l, alpha_r) * g ** (1.0 / p.c)
    return np.where(left, p.m - mag, p.m + mag)
