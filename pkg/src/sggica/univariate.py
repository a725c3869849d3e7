"""Maximum-likelihood fits of single columns to the logistic, split normal and SGG families."""

import math
from dataclasses import dataclass, field

import numpy as np

from .density import UnivariateSgg, logistic_log_pdf, sgg_log_pdf, split_normal_log_pdf
from .errors import DegenerateSideError, DomainError, InsufficientDataError
from .likelihood import profile_loglik, scale_estimators, sufficient_stats

FAMILIES = ("logistic", "split_normal", "sgg")
FAMILY_ALIASES = {"logistic": "logistic", "sn": "split_normal", "split_normal": "split_normal", "sgg": "sgg"}

C_RANGE = (0.3, 8.0)
M_GRID = 65
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class UnivariateFamily:
    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in FAMILIES:
            raise DomainError(f"unknown family {self.tag!r}")

    def log_pdf(self, x):
        p = self.params
        if self.tag == "logistic":
            return logistic_log_pdf(x, p["mu"], p["s"])
        if self.tag == "split_normal":
            return split_normal_log_pdf(x, p["m"], p["sigma"], p["tau"])
        return sgg_log_pdf(x, self.sgg)

    @property
    def sgg(self):
        if self.tag != "sgg":
            raise AttributeError("only sgg fits carry an UnivariateSgg")
        p = self.params
        return UnivariateSgg(p["m"], p["sigma_l"], p["sigma_r"], p["c"])


def golden_max(f, a, b, tol=1e-8, max_iter=200):
    """Maximise a unimodal ``f`` on [a, b]; returns ``(x, f(x))``."""
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _profile_1d(x, m, c):
    try:
        return profile_loglik(x, [m], [[1.0]], c)
    except DegenerateSideError:
        return -math.inf


def _best_c(x, m):
    log_lo, log_hi = math.log(C_RANGE[0]), math.log(C_RANGE[1])
    u, val = golden_max(lambda u: _profile_1d(x, m, math.exp(u)), log_lo, log_hi, tol=1e-7)
    return math.exp(u), val


def _search_m(x, objective):
    """Grid over the 5%-95% quantile range, then golden refinement around the best cell."""
    lo, hi = np.quantile(x, [0.05, 0.95])
    grid = np.linspace(lo, hi, M_GRID)
    vals = [objective(m)[1] for m in grid]
    k = int(np.argmax(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, M_GRID - 1)]
    m, _ = golden_max(lambda m: objective(m)[1], a, b, tol=1e-10)
    best = objective(m)
    if best[1] < vals[k]:
        return grid[k], objective(grid[k])
    return m, best


def _split_fit(x, c=None):
    if c is None:
        m, (c_hat, ll) = _search_m(x, lambda m: _best_c(x, m))
    else:
        m, (c_hat, ll) = _search_m(x, lambda m: (c, _profile_1d(x, m, c)))
    est = scale_estimators(sufficient_stats(x, [m], [[1.0]], c_hat))
    return float(m), float(c_hat), float(est.sigma_l[0]), float(est.sigma_r[0]), float(est.tau[0]), float(ll)


def _fit_logistic(x):
    mu = float(np.mean(x))
    log_s = math.log(float(np.std(x)) * math.sqrt(3.0) / math.pi)

    def ll(mu, log_s):
        return float(np.sum(logistic_log_pdf(x, mu, math.exp(log_s))))

    best = ll(mu, log_s)
    for _ in range(100):
        s = math.exp(log_s)
        mu, _ = golden_max(lambda t: ll(t, log_s), mu - 2 * s, mu + 2 * s, tol=1e-11)
        log_s, new = golden_max(lambda t: ll(mu, t), log_s - 1.0, log_s + 1.0, tol=1e-11)
        if new - best <= 1e-10 * (1.0 + abs(best)):
            best = max(best, new)
            break
        best = new
    return UnivariateFamily("logistic", {"mu": mu, "s": math.exp(log_s)}), best


def fit_univariate(family, samples):
    """Fit one family by maximum likelihood; returns ``(UnivariateFamily, loglik)``.

    The SGG fit is never worse than the split-normal fit: the c = 2 solution
    is kept whenever the shape search ends lower.
    """
    tag = FAMILY_ALIASES.get(family)
    if tag is None:
        raise DomainError(f"unknown family {family!r}; expected one of {sorted(FAMILY_ALIASES)}")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 10:
        raise InsufficientDataError(f"need at least 10 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    if np.ptp(x) == 0:
        raise DomainError("degenerate sample: all values equal")

    if tag == "logistic":
        return _fit_logistic(x)
    m, _, sl, sr, tau, ll = _split_fit(x, c=2.0)
    if tag == "split_normal":
        return UnivariateFamily("split_normal", {"m": m, "sigma": sl, "tau": tau}), ll
    m_g, c_g, sl_g, sr_g, _, ll_g = _split_fit(x)
    if ll_g < ll:
        m_g, c_g, sl_g, sr_g, ll_g = m, 2.0, sl, sr, ll
    return UnivariateFamily("sgg", {"m": m_g, "sigma_l": sl_g, "sigma_r": sr_g, "c": c_g}), ll_g
