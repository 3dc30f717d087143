"""Inverse Laplace exponent, reorder-time Laplace transform and moments.

The reorder time of the ``n``-th order is the first passage of demand over
``K = a + (n - 1) Q``.  For a nondecreasing demand process, passage over ``K``
at time ``T_n`` defined from time 0 coincides with passage after
``T_{n-1}``, so no renewal bookkeeping is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError
from .model import DemandModel, Policy, laplace_exponent, psi_derivatives_at_zero
from .special import lambert_w0_of_exp

__all__ = ["FptMoments", "phi_inverse", "fpt_laplace", "fpt_moments"]

_NEWTON_CAP = 200


@dataclass(frozen=True)
class FptMoments:
    """Mean and variance of the ``n``-th reorder time."""

    n: int
    mean: float
    variance: float


def _phi_lambert(model, s):
    mu, alpha, lam = model.drift, model.unit_jump_size, model.unit_jump_rate
    shifted = s + lam
    y = math.log(alpha * lam / mu) + (alpha / mu) * shifted
    return shifted / mu - lambert_w0_of_exp(y) / alpha


def _phi_quadratic(model, s):
    mu, lam_c, eta = model.drift, model.compound_rate, model.jump_dist.rate
    b = mu * eta + s + lam_c
    disc = b * b - 4.0 * mu * s * eta
    # smaller root of mu*th^2 - b*th + s*eta, written without cancellation
    return 2.0 * s * eta / (b + math.sqrt(max(disc, 0.0)))


def _psi_prime(model, theta):
    value = model.drift
    if model.has_unit_jumps:
        value += model.unit_jump_size * model.unit_jump_rate * math.exp(theta * model.unit_jump_size)
    if model.has_compound:
        beta, eta = model.jump_dist.shape, model.jump_dist.rate
        value += model.compound_rate * beta / eta * (1.0 - theta / eta) ** (-(beta + 1.0))
    return value


def _overflow_safe(fn, *args):
    try:
        return fn(*args)
    except OverflowError:
        return math.inf


def _phi_newton(model, s):
    # every term of psi is nonnegative for theta >= 0, so each alone bounds the root
    lo = 0.0
    hi = s / _psi_prime(model, 0.0)
    if model.has_unit_jumps:
        hi = min(hi, math.log1p(s / model.unit_jump_rate) / model.unit_jump_size)
    if model.has_compound:
        beta, eta = model.jump_dist.shape, model.jump_dist.rate
        hi = min(hi, -eta * math.expm1(-math.log1p(s / model.compound_rate) / beta))
    theta = 0.5 * (lo + hi)
    last_step = hi - lo
    for _ in range(_NEWTON_CAP):
        f = _overflow_safe(laplace_exponent, model, theta) - s
        if f == 0.0:
            return theta
        if f > 0.0:
            hi = theta
        else:
            lo = theta
        slope = _overflow_safe(_psi_prime, model, theta)
        step_to = theta - f / slope
        # bisect when Newton leaves the bracket or fails to halve the last step
        if not (lo < step_to < hi) or abs(2.0 * f) > abs(last_step * slope):
            step_to = 0.5 * (lo + hi)
        last_step = abs(step_to - theta)
        if last_step <= 2.0 * math.ulp(max(theta, step_to)) or hi - lo <= 4.0 * math.ulp(hi):
            return step_to
        theta = step_to
    raise ConvergenceError(f"phi_inverse did not converge at s={s!r} within {_NEWTON_CAP} iterations")


def phi_inverse(model: DemandModel, s: float, method: str = "auto") -> float:
    """Nonnegative root ``theta`` of ``laplace_exponent(model, theta) == s``.

    Parameters
    ----------
    model : DemandModel
    s : float
        Transform variable, ``s >= 0``.
    method : {"auto", "lambert", "quadratic", "newton"}
        ``auto`` uses the Lambert-W closed form for drifted unit-jump demand,
        the quadratic closed form for drifted exponential-jump demand and the
        bracketed Newton solver otherwise.  The other values force a branch;
        closed forms raise ``ValueError`` when the model does not fit them.
    """
    s = float(s)
    if not s >= 0.0:
        raise DomainError(f"phi_inverse requires s >= 0, got {s!r}")
    if s == 0.0:
        return 0.0

    lambert_ok = model.drift > 0 and model.has_unit_jumps and not model.has_compound
    quadratic_ok = (
        model.drift > 0
        and model.has_compound
        and not model.has_unit_jumps
        and model.jump_dist.shape == 1.0
    )
    if method == "auto":
        if not model.has_unit_jumps and not model.has_compound:
            return s / model.drift
        method = "lambert" if lambert_ok else "quadratic" if quadratic_ok else "newton"

    if method == "lambert":
        if not lambert_ok:
            raise ValueError("lambert branch needs mu > 0, unit jumps and no compound jumps")
        return _phi_lambert(model, s)
    if method == "quadratic":
        if not quadratic_ok:
            raise ValueError("quadratic branch needs mu > 0 and exponential jumps only")
        return _phi_quadratic(model, s)
    if method == "newton":
        return _phi_newton(model, s)
    raise ValueError(f"unknown method {method!r}")


def fpt_laplace(model: DemandModel, policy: Policy, n: int, s: float) -> float:
    """``exp(-K * phi_inverse(s))`` with ``K = a + (n - 1) Q``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    return math.exp(-float(policy.threshold(n)) * phi_inverse(model, s))


def fpt_moments(model: DemandModel, policy: Policy, n: int) -> FptMoments:
    """Mean ``K / psi'(0)`` and variance ``K psi''(0) / psi'(0)**3`` of the
    ``n``-th reorder time, obtained by differentiating ``fpt_laplace`` at 0."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    level = float(policy.threshold(n))
    d1, d2 = psi_derivatives_at_zero(model)
    return FptMoments(n=int(n), mean=level / d1, variance=level * d2 / d1**3)
