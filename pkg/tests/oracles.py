"""Independent reference computations for the test-suite.

Nothing here calls the library's numerical routines except where a test
explicitly composes them (``*_from_series``): special functions and sums are
done in mpmath at high precision, roots by bracketing, integrals by adaptive
quadrature.
"""
import math
import warnings

import mpmath as mp
import numpy as np
from scipy import integrate

from levy_inventory import DemandModel, Exponential, Gamma

mp.mp.dps = 40


def psi_mp(model: DemandModel, theta):
    theta = mp.mpf(theta)
    value = theta * model.drift
    if model.unit_jump_size > 0 and model.unit_jump_rate > 0:
        value += model.unit_jump_rate * (mp.exp(theta * model.unit_jump_size) - 1)
    if model.compound_rate > 0:
        d = model.jump_dist
        beta = 1 if isinstance(d, Exponential) else d.shape
        value += model.compound_rate * ((d.rate / (d.rate - theta)) ** beta - 1)
    return value


def phi_bisect(model: DemandModel, s: float) -> float:
    """Root of psi(theta) = s by bisection in 40-digit arithmetic."""
    if s == 0:
        return 0.0
    lo = mp.mpf(0)
    if model.compound_rate > 0:
        hi = mp.mpf(model.jump_dist.rate) * (1 - mp.mpf(10) ** -30)
    else:
        hi = mp.mpf(1)
        while psi_mp(model, hi) < s:
            hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if psi_mp(model, mid) < s:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


def unit_only_tail(model: DemandModel, s: float, b: float) -> float:
    """P(mu s + alpha N_s >= b) as a single exact Poisson sum."""
    mu, alpha, lam = model.drift, model.unit_jump_size, model.unit_jump_rate
    if mu * s >= b:
        return 1.0
    need = mp.ceil((mp.mpf(b) - mp.mpf(mu) * s) / alpha)
    mean = mp.mpf(lam) * s
    below = mp.fsum(mp.exp(-mean) * mean**i / mp.factorial(i) for i in range(int(need)))
    return float(1 - below)


def tail_mp(model: DemandModel, s: float, b: float, terms: int = 80) -> float:
    """P(D_s >= b) as an mpmath double sum; ``terms`` per Poisson series."""
    mu = mp.mpf(model.drift)
    units = model.unit_jump_size > 0 and model.unit_jump_rate > 0
    lam_s = mp.mpf(model.unit_jump_rate) * s if units else mp.mpf(0)
    lamc_s = mp.mpf(model.compound_rate) * s
    total = mp.mpf(0)
    for i in range(terms if units else 1):
        p = mp.exp(-lam_s) * lam_s**i / mp.factorial(i) if units else mp.mpf(1)
        resid = mp.mpf(b) - mu * s - (model.unit_jump_size * i if units else 0)
        for j in range(terms if model.compound_rate > 0 else 1):
            q = mp.exp(-lamc_s) * lamc_s**j / mp.factorial(j) if model.compound_rate > 0 else mp.mpf(1)
            if resid <= 0:
                surv = mp.mpf(1)
            elif j == 0:
                surv = mp.mpf(0)
            else:
                d = model.jump_dist
                beta = 1 if isinstance(d, Exponential) else d.shape
                surv = mp.gammainc(j * beta, d.rate * resid, mp.inf, regularized=True)
            total += p * q * surv
    return float(total)


def drift_only_orders(mu, a, q, t):
    """R_t for deterministic demand mu*t."""
    if mu * t < a:
        return 0
    return int(math.floor((mu * t - a) / q + 1e-12)) + 1


def quad_integral(fn, t, points=()):
    """int_0^t fn(s) ds by adaptive Gauss-Kronrod, split at ``points``."""
    edges = sorted({0.0, float(t), *[p for p in points if 0 < p < t]})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            # roundoff notices at 1e-11 are expected; callers compare at looser tolerances
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(fn, lo, hi, epsabs=1e-12, epsrel=1e-11, limit=400)
        total += val
    return total


def fpt_mean_from_tail(tail, level, upper):
    """E[T] = int_0^inf P(D_t < K) dt, truncated at ``upper`` where P(D_t < K) is negligible."""
    return quad_integral(lambda t: 1.0 - tail(t, level), upper)


def random_model(rng: np.random.Generator, kind: str) -> DemandModel:
    """Parameters drawn from continuous ranges, so no lattice ties occur."""
    mu = float(rng.uniform(0.3, 1.5))
    if kind == "unit":
        return DemandModel(mu, float(rng.uniform(0.3, 1.5)), float(rng.uniform(0.5, 2.0)))
    if kind == "exponential":
        return DemandModel(mu, 0.0, 0.0, float(rng.uniform(0.5, 2.0)), Exponential(float(rng.uniform(1.0, 3.0))))
    if kind == "gamma":
        return DemandModel(
            mu, 0.0, 0.0, float(rng.uniform(0.5, 2.0)),
            Gamma(float(rng.uniform(0.5, 3.0)), float(rng.uniform(1.0, 3.0))),
        )
    return DemandModel(
        mu,
        float(rng.uniform(0.3, 1.5)),
        float(rng.uniform(0.5, 2.0)),
        float(rng.uniform(0.5, 2.0)),
        Gamma(float(rng.uniform(0.5, 3.0)), float(rng.uniform(1.0, 3.0))),
    )
