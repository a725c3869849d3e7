"""Log-gamma and digamma on the positive real axis.

Both functions are self-contained (no scipy) so that the normalizing
constants of the split generalized Gaussian are reproducible bit for bit.

ln_gamma uses three regimes:

* x >= 10: Stirling series with Bernoulli terms up to B_16;
* 1.5 <= x < 2.5: Taylor series of ln Gamma(2 + e) in e, whose
  coefficients are (-1)^k (zeta(k) - 1) / k.  This keeps the relative
  error small around the zero of ln Gamma at x = 2;
* everything else is moved into one of the above by the recurrence
  ln Gamma(x + 1) = ln Gamma(x) + ln x.

digamma uses the asymptotic expansion for x >= 6 and the recurrence
psi(x) = psi(x + 1) - 1/x below that.
"""

import math

from .errors import DomainError

EULER_GAMMA = 0.5772156649015329
_HALF_LOG_2PI = 0.9189385332046728

# zeta(k) - 1 for k = 2..33
_ZETA_MINUS_ONE = (
    0.6449340668482264,
    0.2020569031595943,
    0.08232323371113819,
    0.03692775514336993,
    0.01734306198444914,
    0.008349277381922827,
    0.00407735619794434,
    0.0020083928260822143,
    0.0009945751278180853,
    0.0004941886041194645,
    0.0002460865533080483,
    0.00012271334757848915,
    6.124813505870483e-05,
    3.058823630702049e-05,
    1.528225940865187e-05,
    7.637197637899763e-06,
    3.81729326499984e-06,
    1.908212716553939e-06,
    9.539620338727962e-07,
    4.769329867878064e-07,
    2.38450502727733e-07,
    1.1921992596531106e-07,
    5.960818905125948e-08,
    2.980350351465228e-08,
    1.4901554828365043e-08,
    7.45071178983543e-09,
    3.725334024788457e-09,
    1.862659723513049e-09,
    9.313274324196682e-10,
    4.656629065033784e-10,
    2.3283118336765053e-10,
    1.164155017270052e-10,
)

# Bernoulli numbers B_2, B_4, ..., B_16
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)

_STIRLING = tuple(b / ((2 * k) * (2 * k - 1)) for k, b in enumerate(_BERNOULLI, start=1))
_PSI_ASYMPTOTIC = tuple(b / (2 * k) for k, b in enumerate(_BERNOULLI[:7], start=1))


def _check_positive(x, name="x"):
    try:
        x = float(x)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number, got {x!r}") from exc
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {x!r}")
    return x


def _lgamma_stirling(x):
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    for coef in reversed(_STIRLING):
        acc = acc * inv2 + coef
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + acc * inv


def _lgamma_near_two(eps):
    # ln Gamma(2 + eps) = (1 - gamma) eps + sum_{k>=2} (-1)^k (zeta(k) - 1) eps^k / k
    acc = 0.0
    for k in range(len(_ZETA_MINUS_ONE) + 1, 1, -1):
        coef = _ZETA_MINUS_ONE[k - 2] / k
        if k % 2:
            coef = -coef
        acc = acc * eps + coef
    return eps * ((1.0 - EULER_GAMMA) + acc * eps)


def ln_gamma(x):
    """Natural log of the gamma function for finite ``x > 0``."""
    x = _check_positive(x)
    if x >= 10.0:
        return _lgamma_stirling(x)
    if 1.5 <= x < 2.5:
        return _lgamma_near_two(x - 2.0)
    if x >= 2.5:
        prod = 1.0
        while x < 10.0:
            prod *= x
            x += 1.0
        return _lgamma_stirling(x) - math.log(prod)
    if x >= 0.5:
        # x + 1 in [1.5, 2.5)
        return _lgamma_near_two(x - 1.0) - math.log1p(x - 1.0)
    # x + 1 in (1, 1.5), x + 2 in (2, 2.5)
    return _lgamma_near_two(x) - math.log1p(x) - math.log(x)


def digamma(x):
    """Digamma function psi(x) = Gamma'(x) / Gamma(x) for finite ``x > 0``."""
    x = _check_positive(x)
    shift = 0.0
    while x < 6.0:
        shift += 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    acc = 0.0
    for coef in reversed(_PSI_ASYMPTOTIC):
        acc = acc * inv2 + coef
    return math.log(x) - 0.5 / x - acc * inv2 - shift


def beta_of_c(c):
    """Gamma(3/c) / Gamma(1/c), the variance factor of a shape-``c`` density."""
    c = _check_positive(c, "c")
    return math.exp(ln_gamma(3.0 / c) - ln_gamma(1.0 / c))
