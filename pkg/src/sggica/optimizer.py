"""Fitting the SGG ICA model by gradient ascent on the profile log-likelihood.

The ascent runs in whitened coordinates over (m, W, ln c).  Each accepted
step is followed by renormalising the rows of W to unit length, which does
not change the objective (ln l is invariant to row scaling).  Steps are
chosen by Armijo backtracking; trial points that are singular, leave a
component with an empty side, or push c outside its bounds count as -inf.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ._rng import CounterRng
from .density import MultiSgg
from .errors import DegenerateSideError, FitError, InsufficientDataError, SggError, SingularMatrixError
from .gradients import profile_loglik_and_grad
from .likelihood import profile_loglik, scale_estimators, sufficient_stats

log = logging.getLogger(__name__)

_RESTART_STRIDE = 0x632BE59BD9B4E019
_MIN_STEP = 1e-14


@dataclass
class FitConfig:
    max_iter: int = 2000
    grad_tol: float = 1e-6
    step_init: float = 1.0
    backtrack_factor: float = 0.5
    armijo_coeff: float = 1e-4
    restarts: int = 5
    seed: int = 0
    c_bounds: Tuple[float, float] = (0.25, 8.0)
    c_init: float = 2.0
    whiten: bool = True
    fixed_c: Optional[float] = None
    stall_tol: float = 1e-9
    stall_window: int = 25

    def __post_init__(self):
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0 < self.c_bounds[0] < self.c_bounds[1]:
            raise ValueError("c_bounds must satisfy 0 < c_min < c_max")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.fixed_c is not None and not self.fixed_c > 0:
            raise ValueError("fixed_c must be > 0")


@dataclass(frozen=True, eq=False)
class Preprocess:
    mean: np.ndarray
    whitener: np.ndarray
    dewhitener: np.ndarray

    def apply(self, X):
        return (np.asarray(X, dtype=float) - self.mean) @ self.whitener.T

    def invert(self, Z):
        return np.asarray(Z, dtype=float) @ self.dewhitener.T + self.mean


@dataclass(eq=False)
class FitResult:
    model: MultiSgg
    loglik: float
    iterations: int
    converged: bool
    restart_index: int
    trace: List[float] = field(default_factory=list)
    grad_norm: float = math.nan
    stop_reason: str = ""


def center_whiten(X):
    """Center and symmetrically whiten ``X`` (n, d); returns ``(Z, Preprocess)``."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if n <= d:
        raise InsufficientDataError(f"need more samples than channels, got n={n}, d={d}")
    mean = X.mean(axis=0)
    cov = np.atleast_2d(np.cov(X, rowvar=False))
    evals, evecs = np.linalg.eigh(cov)
    if not evals[0] > 1e-10 * evals[-1]:
        raise SingularMatrixError(
            "sample covariance is rank deficient; reduce the number of channels (e.g. with PCA) before fitting"
        )
    whitener = (evecs / np.sqrt(evals)) @ evecs.T
    dewhitener = (evecs * np.sqrt(evals)) @ evecs.T
    pre = Preprocess(mean=mean, whitener=whitener, dewhitener=dewhitener)
    return pre.apply(X), pre


def init_params(Z, config, restart_index):
    """Starting point: median center, identity (restart 0) or a seeded random rotation."""
    Z = np.asarray(Z, dtype=float)
    d = Z.shape[1]
    m0 = np.median(Z, axis=0)
    if restart_index == 0:
        W0 = np.eye(d)
    else:
        rng = CounterRng(config.seed + restart_index * _RESTART_STRIDE)
        Q, R = np.linalg.qr(rng.normal(d * d).reshape(d, d))
        W0 = Q * np.sign(np.diag(R))
    c0 = config.fixed_c if config.fixed_c is not None else config.c_init
    return m0, W0, float(c0)


def _unit_rows(W):
    return W / np.linalg.norm(W, axis=1, keepdims=True)


def _evaluate(Z, m, W, c):
    try:
        value, grad = profile_loglik_and_grad(Z, m, W, c)
    except (DegenerateSideError, SingularMatrixError):
        return -math.inf, None
    if not math.isfinite(value):
        return -math.inf, None
    return value, grad


def _feasible_start(Z, m0, W0, c0, config):
    value, grad = _evaluate(Z, m0, W0, c0)
    if grad is not None:
        return m0, value, grad
    q75, q25 = np.percentile(Z, [75, 25], axis=0)
    iqr = np.where(q75 > q25, q75 - q25, 1.0)
    rng = CounterRng(config.seed ^ 0x5DEECE66D)
    for _ in range(100):
        m = m0 + 0.01 * iqr * np.where(rng.uniform(m0.size) < 0.5, -1.0, 1.0)
        value, grad = _evaluate(Z, m, W0, c0)
        if grad is not None:
            return m, value, grad
        m0 = m
    raise FitError("no feasible initial point: a component has an empty side")


def ascend(Z, m0, W0, c0, config):
    """Armijo gradient ascent from (m0, W0, c0); returns a FitResult in Z's coordinates."""
    Z = np.asarray(Z, dtype=float)
    n, d = Z.shape
    c_lo, c_hi = config.c_bounds
    learn_c = config.fixed_c is None
    if not c_lo <= c0 <= c_hi:
        raise FitError(f"initial c={c0} outside bounds {config.c_bounds}")

    W = _unit_rows(np.asarray(W0, dtype=float))
    c = float(c0)
    m, value, grad = _feasible_start(Z, np.asarray(m0, dtype=float), W, c, config)
    trace = [value]
    step = config.step_init
    stop_reason = "max_iter"
    iterations = 0
    gnorm = math.inf

    for iterations in range(1, config.max_iter + 1):
        g_m = grad.d_m / n
        g_W = grad.d_W / n
        g_u = c * grad.d_c / n if learn_c else 0.0
        gnorm = max(np.max(np.abs(g_m)), np.max(np.abs(g_W)), abs(g_u))
        if gnorm < config.grad_tol:
            stop_reason = "gradient"
            iterations -= 1
            break
        sq = float(np.sum(g_m**2) + np.sum(g_W**2) + g_u**2)
        u = math.log(c)
        t = step
        accepted = False
        while t >= _MIN_STEP:
            c_try = math.exp(u + t * g_u)
            if c_lo <= c_try <= c_hi:
                m_try = m + t * g_m
                W_try = _unit_rows(W + t * g_W)
                v_try, gr_try = _evaluate(Z, m_try, W_try, c_try)
                if v_try - value >= config.armijo_coeff * t * sq * n:
                    accepted = True
                    break
            t *= config.backtrack_factor
        if not accepted:
            stop_reason = "stalled"
            iterations -= 1
            break
        m, W, c, value, grad = m_try, W_try, c_try, v_try, gr_try
        trace.append(value)
        step = t / config.backtrack_factor
        w = config.stall_window
        if len(trace) > w and trace[-1] - trace[-1 - w] <= config.stall_tol * n:
            stop_reason = "stalled"
            break

    if stop_reason != "gradient":
        g_u = c * grad.d_c / n if learn_c else 0.0
        gnorm = max(np.max(np.abs(grad.d_m / n)), np.max(np.abs(grad.d_W / n)), abs(g_u))

    est = scale_estimators(sufficient_stats(Z, m, W, c))
    model = MultiSgg(m=m, W=W, sigma_l=est.sigma_l, sigma_r=est.sigma_r, c=c)
    return FitResult(
        model=model,
        loglik=value,
        iterations=iterations,
        converged=stop_reason in ("gradient", "stalled"),
        restart_index=0,
        trace=trace,
        grad_norm=float(gnorm),
        stop_reason=stop_reason,
    )


def _thread_cap(restarts):
    raw = os.environ.get("SGGICA_THREADS")
    if raw:
        try:
            return max(1, min(restarts, int(raw)))
        except ValueError:
            log.warning("ignoring non-integer SGGICA_THREADS=%r", raw)
    return restarts


def fit_ica(X, config=None):
    """Fit the model to observations ``X`` of shape (n, d)."""
    config = config or FitConfig()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    if n <= 10 * d:
        raise InsufficientDataError(f"need n > 10 d samples, got n={n}, d={d}")
    if not np.all(np.isfinite(X)):
        raise FitError("input contains non-finite values")
    # the objective ignores sample order; a canonical order makes the float path ignore it too
    X = X[np.lexsort(X.T[::-1])]

    if config.whiten:
        Z, pre = center_whiten(X)
    else:
        Z, pre = X, Preprocess(mean=np.zeros(d), whitener=np.eye(d), dewhitener=np.eye(d))

    def run(r):
        try:
            m0, W0, c0 = init_params(Z, config, r)
            res = ascend(Z, m0, W0, c0, config)
        except SggError as exc:
            return r, None, f"restart {r}: {exc}"
        res.restart_index = r
        return r, res, f"restart {r}: loglik={res.loglik:.10g} iterations={res.iterations} stop={res.stop_reason}"

    workers = _thread_cap(config.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(config.restarts)))
    else:
        outcomes = [run(r) for r in range(config.restarts)]

    diagnostics = [msg for _, _, msg in outcomes]
    for msg in diagnostics:
        log.debug(msg)
    best = None
    for _, res, _ in outcomes:
        if res is not None and (best is None or res.loglik > best.loglik):
            best = res
    if best is None:
        raise FitError("all restarts infeasible", diagnostics)

    mw = best.model
    W_orig = mw.W @ pre.whitener
    m_orig = pre.mean + pre.dewhitener @ mw.m
    est = scale_estimators(sufficient_stats(X, m_orig, W_orig, mw.c))
    model = MultiSgg(m=m_orig, W=W_orig, sigma_l=est.sigma_l, sigma_r=est.sigma_r, c=mw.c)
    offset = n * float(np.linalg.slogdet(pre.whitener)[1])
    return FitResult(
        model=model,
        loglik=profile_loglik(X, m_orig, W_orig, mw.c),
        iterations=best.iterations,
        converged=best.converged,
        restart_index=best.restart_index,
        trace=[v + offset for v in best.trace],
        grad_norm=best.grad_norm,
        stop_reason=best.stop_reason,
    )


def separate(X, fit):
    """Recovered components ``W (x_i - m)`` as an (n, d) array."""
    model = fit.model if isinstance(fit, FitResult) else fit
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] != model.d:
        raise ValueError(f"model has {model.d} channels, data has {X.shape[1]}")
    return (X - model.m) @ model.W.T
