"""Distribution of cumulative demand by Poisson mixing.

Conditional on ``N_s = i`` unit jumps and ``N'_s = j`` random jumps,
``D_s = mu*s + alpha*i + S_j`` with ``S_j ~ Gamma(j*beta, eta)``.  Mixing over
the two Poisson laws gives ``P(D_s >= b)`` as a double series.  Each Poisson
series is cut to a window around its mode holding at least ``1 - tol/2`` of the
mass; every conditional survival lies in ``[0, 1]``, so the omitted part of the
double series is at most ``tol``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammainccinv, gammaincinv, pdtrc

from .errors import DomainError, ParameterError, TruncationError
from .model import DemandModel, JumpDistribution, Policy, tie_slack
from .special import poisson_pmf, upper_gamma_regularized

__all__ = [
    "SeriesControl",
    "jump_sum_survival",
    "demand_tail",
    "reorder_prob",
    "expected_orders",
]

# per-term slack below which a gamma survival is treated as exactly 0 or 1
_QUANTILE_SLACK = 1e-6
_CHUNK = 1 << 21
# most Fourier terms spent on one compound index before falling back to band sums
_SAWTOOTH_CAP = 64


@dataclass(frozen=True)
class SeriesControl:
    """Truncation settings for the Poisson-mixture series.

    Attributes
    ----------
    tail_mass_tol : float
        Bound on the omitted probability mass of each double series.
    max_unit_index, max_compound_index : int
        Caps on the number of retained terms of the unit-jump and compound
        Poisson series.
    max_replenishments : int
        Cap on the number of thresholds summed in :func:`expected_orders`.
    """

    tail_mass_tol: float = 1e-10
    max_unit_index: int = 10_000
    max_compound_index: int = 10_000
    max_replenishments: int = 100_000

    def __post_init__(self):
        tol = self.tail_mass_tol
        if not (isinstance(tol, (int, float)) and 0 < tol <= 1e-3):
            raise ParameterError("tail_mass_tol must be in (0, 1e-3]")
        for name in ("max_unit_index", "max_compound_index", "max_replenishments"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ParameterError(f"{name} must be an integer >= 1")


def jump_sum_survival(dist: JumpDistribution, j: int, x: float) -> float:
    """``P(J_1 + ... + J_j >= x)``; the empty sum is 0."""
    if j < 0:
        raise DomainError(f"j must be >= 0, got {j!r}")
    if x <= 0:
        return 1.0
    if j == 0:
        return 0.0
    return upper_gamma_regularized(j * dist.shape, dist.rate * x)


def _poisson_window(mean, tol, cap, label):
    """Indices and pmf values of a Poisson window holding >= 1 - tol/2 of the mass."""
    if mean == 0.0:
        return np.zeros(1, dtype=np.int64), np.ones(1)
    spread = 10.0 * math.sqrt(mean) + 20.0
    lo = max(0, int(math.floor(mean - spread)))
    hi = int(math.ceil(mean + spread))
    while True:
        k = np.arange(lo, hi + 1, dtype=np.int64)
        pmf = poisson_pmf(k, mean)
        if pmf.sum() >= 1.0 - tol / 4.0:
            break
        lo = max(0, lo - int(spread))
        hi += int(spread)
    # trim both ends while the discarded mass stays within tol/2
    budget = tol / 2.0 - max(0.0, 1.0 - pmf.sum())
    left, right = 0, len(pmf) - 1
    while left < right:
        smaller_left = pmf[left] <= pmf[right]
        drop = pmf[left] if smaller_left else pmf[right]
        if drop > budget:
            break
        budget -= drop
        if smaller_left:
            left += 1
        else:
            right -= 1
    k, pmf = k[left : right + 1], pmf[left : right + 1]
    if len(k) > cap:
        raise TruncationError(
            f"{label} Poisson series (mean {mean:.6g}) needs {len(k)} terms, cap is {cap}"
        )
    return k, pmf


def _unit_window(model, s, ctrl):
    if not model.has_unit_jumps:
        return np.zeros(1, dtype=np.int64), np.ones(1)
    return _poisson_window(model.unit_jump_rate * s, ctrl.tail_mass_tol, ctrl.max_unit_index, "unit-jump")


def _compound_window(model, s, ctrl):
    if not model.has_compound:
        return np.zeros(1, dtype=np.int64), np.ones(1)
    return _poisson_window(model.compound_rate * s, ctrl.tail_mass_tol, ctrl.max_compound_index, "compound")


def _survival_table(model, j, x):
    """Survival of ``S_j`` at residual levels ``x`` (broadcast over rows of x)."""
    out = np.asarray(x <= 0.0, dtype=float)
    if model.has_compound:
        jj = np.broadcast_to(j, x.shape)
        mask = (x > 0.0) & (jj > 0)
        if mask.any():
            dist = model.jump_dist
            out[mask] = gammaincc(jj[mask] * dist.shape, dist.rate * x[mask])
    return out


def demand_tail(model: DemandModel, s: float, b: float, ctrl: SeriesControl = SeriesControl()) -> float:
    """``P(D_s >= b)`` from the truncated Poisson-mixture series, clamped to [0, 1]."""
    s, b = float(s), float(b)
    if not s >= 0:
        raise DomainError(f"s must be >= 0, got {s!r}")
    if not b > 0:
        raise DomainError(f"b must be > 0, got {b!r}")
    slack = float(tie_slack(b))
    if model.drift * s >= b - slack:
        return 1.0
    if not model.has_compound:
        # exact Poisson upper tail: N_s >= ceil((b - mu s) / alpha)
        if not model.has_unit_jumps:
            return 0.0
        need = math.ceil((b - slack - model.drift * s) / model.unit_jump_size)
        return float(pdtrc(need - 1, model.unit_jump_rate * s))
    i, p = _unit_window(model, s, ctrl)
    j, q = _compound_window(model, s, ctrl)
    residual = b - model.drift * s - model.unit_jump_size * i.astype(float)
    total = 0.0
    rows = max(1, _CHUNK // len(j))
    for start in range(0, len(i), rows):
        sl = slice(start, start + rows)
        table = _survival_table(model, j[None, :], residual[sl, None] - slack + np.zeros((1, len(j))))
        total += float(p[sl] @ (table @ q))
    return min(1.0, max(0.0, total))


def reorder_prob(model: DemandModel, policy: Policy, n: int, t: float, ctrl: SeriesControl = SeriesControl()) -> float:
    """``P(T_n < t) = P(D_t >= a + (n - 1) Q)``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    return demand_tail(model, t, float(policy.threshold(n)), ctrl)


def _gamma_quantiles(model, j, tol):
    # levels between which S_j is neither almost surely below nor above
    slack = tol * _QUANTILE_SLACK
    shape = j * model.jump_dist.shape
    eta = model.jump_dist.rate
    return gammaincinv(shape, slack) / eta, gammainccinv(shape, slack) / eta


def _band_sums(band, sure, base, shapes, eta, a, qty):
    """Sum of gamma survivals over each cell's band of thresholds."""
    flat = band.ravel()
    total = int(flat.sum())
    if total == 0:
        return np.zeros(band.shape)
    cell = np.repeat(np.arange(flat.size), flat)
    offset = np.arange(total) - np.repeat(np.cumsum(flat) - flat, flat)
    n_idx = sure.ravel()[cell] + offset  # 0-based threshold index
    ii, jj = np.divmod(cell, band.shape[1])
    level = a + n_idx * qty - base[ii]
    vals = gammaincc(shapes[jj], eta * np.maximum(level, 0.0))
    return np.bincount(cell, weights=vals, minlength=flat.size).reshape(band.shape)


def _sawtooth_terms(shape, eta, qty, slack):
    """Fourier terms needed per compound index so the truncated sawtooth series
    for the expected fractional part is accurate to ``slack``.

    With ``c = 2 pi / (Q eta)`` the k-th coefficient is bounded by
    ``(c k)**(-shape)`` and the tail beyond ``K`` by ``(c K)**(-shape) / (pi shape)``.
    """
    c = 2.0 * math.pi / (qty * eta)
    with np.errstate(over="ignore"):
        need = np.ceil(slack ** (-1.0 / shape) / c)
    return np.where(np.isfinite(need), np.maximum(need, 1.0), np.inf)


def _sawtooth_cells(base, shapes, eta, a, qty, terms):
    """``E[floor(Y) + 1]`` for ``Y = (base_i + S_j - a) / Q`` on the (i, j) grid.

    Uses ``{y} = 1/2 - sum_k sin(2 pi k y) / (pi k)`` and the characteristic
    function ``(1 - i w / eta)**(-shape)`` of ``S_j``.
    """
    y0 = (base - a) / qty
    frac = y0 - np.floor(y0)
    out = (y0[:, None] + shapes[None, :] / (eta * qty)) + 0.5
    for k in range(1, int(terms.max()) + 1):
        w = 2.0 * math.pi * k / qty
        u = np.exp(2j * math.pi * k * frac)
        v = np.exp(-shapes * np.log(1.0 - 1j * w / eta))
        v = np.where(terms >= k, v, 0.0)
        out += np.imag(u[:, None] * v[None, :]) / (math.pi * k)
    return out


def expected_orders(
    model: DemandModel,
    policy: Policy,
    t: float,
    ctrl: SeriesControl = SeriesControl(),
) -> float:
    """``E[R_t] = sum_n P(D_t >= a + (n - 1) Q)``.

    The sum over thresholds is reorganized per Poisson cell ``(i, j)``.  When
    the jump sum ``S_j`` is spread wide relative to ``Q`` and almost surely
    clears the first threshold, the count ``floor(Y) + 1`` is averaged in
    closed form through a short Fourier series of the fractional part.
    Otherwise thresholds at or below the lower ``S_j`` quantile count one
    each, thresholds beyond the upper quantile count zero and the band in
    between is summed with incomplete-gamma evaluations.
    """
    t = float(t)
    if not t >= 0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    if t == 0.0:
        return 0.0
    tol = ctrl.tail_mass_tol
    slack = tol * _QUANTILE_SLACK
    a, qty = policy.reorder_offset, policy.order_quantity
    i, p = _unit_window(model, t, ctrl)
    j, q = _compound_window(model, t, ctrl)
    base = model.drift * t + model.unit_jump_size * i.astype(float)

    def count(level):
        return np.asarray(policy.orders_triggered(level), dtype=np.int64)

    def check_cap(top):
        if top > ctrl.max_replenishments:
            raise TruncationError(
                f"{top} thresholds needed at t={t:.6g}, cap is {ctrl.max_replenishments}"
            )

    per_i = np.zeros(len(i))
    if j[0] == 0:
        per_i += q[0] * count(base)
    jpos = j[j > 0]
    qpos = q[j > 0]
    if not len(jpos):
        return float(p @ per_i)

    dist = model.jump_dist
    shapes = jpos * dist.shape
    lo_q, hi_q = _gamma_quantiles(model, jpos.astype(float), tol)
    terms = _sawtooth_terms(shapes, dist.rate, qty, slack)
    closed = (terms <= _SAWTOOTH_CAP)[None, :] & (base[:, None] + lo_q[None, :] >= a - qty)

    sure = count(base[:, None] + lo_q[None, :])
    last = count(base[:, None] + hi_q[None, :])
    band = np.where(closed, 0, last - sure)
    if (~closed).any():
        check_cap(int(last[~closed].max()))
    contrib = np.where(closed, 0.0, sure.astype(float))

    cols = np.flatnonzero(closed.any(axis=0))
    if len(cols):
        vals = _sawtooth_cells(base, shapes[cols], dist.rate, a, qty, terms[cols])
        contrib[:, cols] += np.where(closed[:, cols], vals, 0.0)

    col_load = np.cumsum(band.sum(axis=0))
    c0 = 0
    while c0 < len(jpos):
        if band[:, c0].sum() == 0:
            c0 += 1
            continue
        # widest block of compound indices whose band fits in one chunk
        done = col_load[c0 - 1] if c0 else 0
        c1 = max(c0 + 1, int(np.searchsorted(col_load, done + _CHUNK, side="right")))
        contrib[:, c0:c1] += _band_sums(
            band[:, c0:c1], sure[:, c0:c1], base, shapes[c0:c1], dist.rate, a, qty
        )
        c0 = c1
    per_i += contrib @ qpos
    return float(p @ per_i)
