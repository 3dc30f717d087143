"""Scalar special functions: real Lambert W, regularized upper incomplete gamma,
and a log-domain Poisson pmf.

The Lambert W routines follow Corless et al., "On the Lambert W function"
(Adv. Comput. Math. 5, 1996): a branch-point series, the log-log asymptote or
a rational guess as the starting value, then Halley's iteration.
"""
import math

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "lambert_w0",
    "lambert_w0_of_exp",
    "upper_gamma_regularized",
    "poisson_pmf",
]

_INV_E = math.exp(-1.0)
_EPS = np.finfo(float).eps
_MAX_HALLEY = 64


def lambert_w0(z):
    """Principal branch W0 of the Lambert W function for real ``z >= -1/e``.

    Returns ``w >= -1`` with ``w * exp(w) == z``.

    Raises
    ------
    DomainError
        If ``z < -1/e`` (no real solution on the principal branch).
    """
    z = float(z)
    if math.isnan(z):
        raise DomainError("lambert_w0 is undefined for NaN")
    if z == math.inf:
        return math.inf
    branch_gap = z + _INV_E
    if branch_gap < 0.0:
        # -1/e itself is not representable; allow the rounding slack around it
        if branch_gap > -4.0 * _EPS:
            return -1.0
        raise DomainError(f"lambert_w0 requires z >= -1/e, got {z!r}")
    if z == 0.0:
        return 0.0
    if branch_gap == 0.0:
        return -1.0

    if z < -0.3:
        p = math.sqrt(2.0 * (math.e * z + 1.0))
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    elif z > math.e:
        l1 = math.log(z)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    else:
        w = z / (1.0 + z)

    for _ in range(_MAX_HALLEY):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= 4.0 * _EPS * (1.0 + abs(w)):
            break
    return w


def lambert_w0_of_exp(y):
    """``W0(exp(y))`` without forming ``exp(y)``.

    For ``y > 1`` this solves ``w + log(w) = y`` directly, which stays finite
    long after ``exp(y)`` overflows.
    """
    y = float(y)
    if y <= 1.0:
        return lambert_w0(math.exp(y))
    if math.isinf(y):
        return math.inf
    w = y - math.log(y)
    for _ in range(_MAX_HALLEY):
        f = w + math.log(w) - y
        d1 = 1.0 + 1.0 / w
        d2 = -1.0 / (w * w)
        dw = f / (d1 - 0.5 * f * d2 / d1)
        w -= dw
        if abs(dw) <= 4.0 * _EPS * w:
            break
    return w


def _lower_series(a, x, log_prefactor):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0
    total = 1.0
    ap = a
    for _ in range(100_000):
        ap += 1.0
        term *= x / ap
        total += term
        if term <= total * _EPS:
            break
    return total * math.exp(log_prefactor - math.log(a))


def _upper_continued_fraction(a, x, log_prefactor):
    # Modified Lentz evaluation of the Legendre continued fraction for Gamma(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 100_000):
        an = -i * (i - a)
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
        if abs(delta - 1.0) <= _EPS:
            break
    return math.exp(log_prefactor) * h


def upper_gamma_regularized(shape, x):
    """Regularized upper incomplete gamma ``Q(shape, x) = Gamma(shape, x) / Gamma(shape)``.

    Uses the lower power series (and ``1 - P``) for ``x < shape + 1`` and the
    Legendre continued fraction otherwise.
    """
    shape = float(shape)
    x = float(x)
    if not shape > 0.0:
        raise DomainError(f"upper_gamma_regularized requires shape > 0, got {shape!r}")
    if not x >= 0.0:
        raise DomainError(f"upper_gamma_regularized requires x >= 0, got {x!r}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    log_prefactor = shape * math.log(x) - x - math.lgamma(shape)
    if x < shape + 1.0:
        q = 1.0 - _lower_series(shape, x, log_prefactor)
    else:
        q = _upper_continued_fraction(shape, x, log_prefactor)
    return min(1.0, max(0.0, q))


def poisson_pmf(k, mean):
    """Poisson probability ``exp(-mean) * mean**k / k!`` evaluated in log space.

    ``k`` may be an integer or an integer array; ``mean = 0`` gives the
    indicator of ``k == 0``.
    """
    mean = float(mean)
    k_arr = np.asarray(k)
    if mean < 0.0:
        raise DomainError(f"poisson_pmf requires mean >= 0, got {mean!r}")
    if mean == 0.0:
        out = (k_arr == 0).astype(float)
    else:
        kf = k_arr.astype(float)
        out = np.exp(kf * math.log(mean) - mean - gammaln(kf + 1.0))
        out = np.where(k_arr < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out
