"""Special functions backing the closed-form constant formulas.

Everything here is a pure deterministic function of its arguments:
log-gamma (Lanczos), the regularized incomplete gamma functions
(series / continued fraction split at x = s+1), absolute moments of a
standard Gaussian, and the normalizer 1/E|cos(2*pi*U)|^p of the real
projection of a Steinhaus variable.
"""

from __future__ import annotations

import math

from .errors import DomainError

__all__ = [
    "log_gamma",
    "reg_lower_inc_gamma",
    "reg_upper_inc_gamma",
    "log_upper_gamma_exp_scaled",
    "gaussian_abs_moment",
    "steinhaus_beta",
]

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)
_HALF_LOG_PI = 0.5 * math.log(math.pi)

# Lanczos approximation, g = 7, 9 terms.  This coefficient set is accurate
# to ~15 significant digits for Re(x) > 0.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_EPS = 1e-16
_MAX_ITER = 600


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0.

    Relative error below 1e-13 on [0.5, 200].
    """
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (x - 1.0 + i)
    t = x + _LANCZOS_G - 0.5
    return _HALF_LOG_TWO_PI + (x - 0.5) * math.log(t) - t + math.log(acc / 1.0)


def _lower_series(s: float, x: float) -> float:
    """P(s, x) by the ascending series; good for x < s + 1."""
    if x == 0.0:
        return 0.0
    term = 1.0 / s
    total = term
    n = 0
    while n < _MAX_ITER:
        n += 1
        term *= x / (s + n)
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    log_p = -x + s * math.log(x) - log_gamma(s) + math.log(total)
    return math.exp(log_p)


def _upper_cf_factor(s: float, x: float) -> float:
    """Continued-fraction factor h with Q(s,x) = exp(-x + s ln x - lnGamma(s)) * h.

    Modified Lentz iteration; good for x >= s + 1.
    """
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def reg_lower_inc_gamma(s: float, x: float) -> float:
    """Regularized lower incomplete gamma P(s, x), clamped to [0, 1].

    Nondecreasing in x with P(s, 0) = 0 and P(s, inf) = 1; absolute error
    below 1e-12.
    """
    if not s > 0.0:
        raise DomainError(f"reg_lower_inc_gamma requires s > 0, got {s!r}")
    if x < 0.0:
        raise DomainError(f"reg_lower_inc_gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        p = _lower_series(s, x)
    else:
        h = _upper_cf_factor(s, x)
        q = math.exp(-x + s * math.log(x) - log_gamma(s)) * h
        p = 1.0 - q
    return min(1.0, max(0.0, p))


def reg_upper_inc_gamma(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).

    Computed directly from the continued fraction for x >= s + 1 so that
    tiny tail values keep full relative accuracy.
    """
    if not s > 0.0:
        raise DomainError(f"reg_upper_inc_gamma requires s > 0, got {s!r}")
    if x < 0.0:
        raise DomainError(f"reg_upper_inc_gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_series(s, x)))
    h = _upper_cf_factor(s, x)
    q = math.exp(-x + s * math.log(x) - log_gamma(s)) * h
    return min(1.0, max(0.0, q))


def log_upper_gamma_exp_scaled(s: float, x: float) -> float:
    """log of integral_x^inf t^(s-1) exp(x - t) dt  ( = e^x Gamma(s) Q(s,x) ).

    The exponential rescaling keeps the value representable for large x,
    where e^x and Q(s, x) would individually over/underflow.  Used for
    moments of densities with exponential tails starting at an offset.
    """
    if not s > 0.0:
        raise DomainError(f"log_upper_gamma_exp_scaled requires s > 0, got {s!r}")
    if x < 0.0:
        raise DomainError(f"log_upper_gamma_exp_scaled requires x >= 0, got {x!r}")
    if x == 0.0:
        return log_gamma(s)
    if x < s + 1.0:
        q = 1.0 - _lower_series(s, x)
        return x + log_gamma(s) + math.log(q)
    h = _upper_cf_factor(s, x)
    return s * math.log(x) + math.log(h)


def gaussian_abs_moment(p: float) -> float:
    """E|Z|^p for a standard Gaussian Z: 2^(p/2) Gamma((p+1)/2) / sqrt(pi)."""
    if p < 0.0:
        raise DomainError(f"gaussian_abs_moment requires p >= 0, got {p!r}")
    return math.exp(0.5 * p * math.log(2.0) + log_gamma(0.5 * (p + 1.0)) - _HALF_LOG_PI)


def steinhaus_beta(p: float) -> float:
    """1 / E|cos(2 pi U)|^p = sqrt(pi) Gamma((p+2)/2) / Gamma((p+1)/2)."""
    if not p > 0.0:
        raise DomainError(f"steinhaus_beta requires p > 0, got {p!r}")
    return math.exp(
        _HALF_LOG_PI + log_gamma(0.5 * (p + 2.0)) - log_gamma(0.5 * (p + 1.0))
    )
