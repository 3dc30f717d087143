"""Exact event-driven Monte Carlo for the demand process and the inventory policy.

Paths are indexed ``0 .. paths - 1`` and path ``k`` always draws from the
stream keyed by ``(seed, k)``.  Estimates are therefore bit-identical for a
fixed seed whatever the thread count, and a single path can be replayed on its
own with :class:`RngStream`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import List, Tuple

import warnings

import numba
import numpy as np
from numba.core.errors import NumbaWarning

from . import _kernels as K
from ._workers import worker_count
from .cost import CostBreakdown
from .errors import DomainError, ParameterError
from .model import CostRates, DemandModel, Policy

__all__ = [
    "RngStream",
    "PathEvent",
    "McConfig",
    "McEstimate",
    "McCostBreakdown",
    "PathFunctionals",
    "simulate_path",
    "sample_fpt",
    "sample_fpts",
    "sample_demand",
    "simulate_policy_paths",
    "estimate_fpt_moments",
    "estimate_cost",
    "estimate_tail",
    "estimate_order_identity",
    "summarize",
]

# numba falls back to another threading layer on its own; the notice is noise
warnings.filterwarnings("ignore", message="The TBB threading layer", category=NumbaWarning)

_SEED_LIMIT = 1 << 64
# paths per compiled call, bounds memory for very large runs
_BATCH = 1 << 20
_SOURCES = {K.SRC_UNIT: "unit_jump", K.SRC_COMPOUND: "compound_jump"}


def _check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < _SEED_LIMIT:
        raise ParameterError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


@dataclass(frozen=True)
class RngStream:
    """Random stream of one path: the master seed and the path index."""

    seed: int = 42
    path: int = 0

    def __post_init__(self):
        _check_seed(self.seed)
        if isinstance(self.path, bool) or not isinstance(self.path, (int, np.integer)) or not 0 <= self.path < _SEED_LIMIT:
            raise ParameterError(f"path must be an integer in [0, 2**64), got {self.path!r}")


@dataclass(frozen=True)
class PathEvent:
    """A demand jump: its time, size and which Poisson stream produced it."""

    time: float
    jump_size: float
    source: str


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run settings.

    ``horizon`` is the time horizon used by cost and order-count runs.
    """

    paths: int = 100_000
    horizon: float = 1.0
    seed: int = 42
    confidence_level: float = 0.95

    def __post_init__(self):
        if isinstance(self.paths, bool) or not isinstance(self.paths, int) or self.paths < 100:
            raise ParameterError("paths must be an integer >= 100")
        if not (isinstance(self.horizon, (int, float)) and math.isfinite(self.horizon) and self.horizon > 0):
            raise ParameterError("horizon must be > 0")
        _check_seed(self.seed)
        cl = self.confidence_level
        if not (isinstance(cl, float) and 0.0 < cl < 1.0):
            raise ParameterError("confidence_level must be in (0, 1)")

    @property
    def z(self) -> float:
        return NormalDist().inv_cdf(0.5 + 0.5 * self.confidence_level)


@dataclass(frozen=True)
class McEstimate:
    """Point estimate with standard error and a normal-approximation interval."""

    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    paths_used: int

    def covers(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def z_score(self, value: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if value == self.mean else math.copysign(math.inf, self.mean - value)
        return (self.mean - value) / self.std_error


@dataclass(frozen=True)
class McCostBreakdown:
    ordering: McEstimate
    holding: McEstimate
    stockout: McEstimate
    total: McEstimate
    horizon: float
    # ordering + holding, the part the analytic path evaluates
    without_stockout: McEstimate

    def point(self) -> CostBreakdown:
        return CostBreakdown(
            self.ordering.mean, self.holding.mean, self.stockout.mean, self.total.mean, self.horizon
        )


@dataclass(frozen=True)
class PathFunctionals:
    """Per-path functionals of the inventory process on ``[0, horizon]``.

    Attributes
    ----------
    orders : ndarray
        ``R_t``; an order placed exactly at the horizon is counted, so that
        ``E[R_t] = sum_n P(D_t >= K_n)`` also holds when demand sits on a
        threshold at ``t`` with positive probability.
    inventory_area : ndarray
        ``int_0^t X_s ds``.
    stockout_area : ndarray
        ``int_0^t max(-X_s, 0) ds``.
    order_area : ndarray
        ``int_0^t R_s ds``.
    order_time_sum : ndarray
        Sum of the counted order times.
    demand : ndarray
        ``D_t``.
    """

    horizon: float
    orders: np.ndarray
    inventory_area: np.ndarray
    stockout_area: np.ndarray
    order_area: np.ndarray
    order_time_sum: np.ndarray
    demand: np.ndarray


def _set_threads():
    numba.set_num_threads(max(1, min(worker_count(), numba.config.NUMBA_NUM_THREADS)))


def _model_args(model: DemandModel):
    alpha = model.unit_jump_size if model.has_unit_jumps else 0.0
    lam = model.unit_jump_rate if model.has_unit_jumps else 0.0
    if model.has_compound:
        return (model.drift, alpha, lam, model.compound_rate, float(model.jump_dist.shape), model.jump_dist.rate)
    return (model.drift, alpha, lam, 0.0, 1.0, 1.0)


def _batched(kernel, args, seed, paths):
    _set_threads()
    parts = []
    for first in range(0, paths, _BATCH):
        count = min(_BATCH, paths - first)
        parts.append(kernel(*args, np.uint64(seed), np.uint64(first), count))
    return np.concatenate(parts) if len(parts) > 1 else parts[0]


def summarize(samples, confidence_level: float = 0.95) -> McEstimate:
    """Sample mean with its standard error and normal interval."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return _estimate(mean, se, n, confidence_level)


def _estimate(mean, se, n, confidence_level, lo=-math.inf, hi=math.inf):
    z = NormalDist().inv_cdf(0.5 + 0.5 * confidence_level)
    return McEstimate(
        mean=mean,
        std_error=se,
        ci_low=max(lo, min(mean, mean - z * se)),
        ci_high=min(hi, max(mean, mean + z * se)),
        paths_used=n,
    )


def _variance_estimate(x, confidence_level):
    # unbiased variance; its SE uses the fourth central moment
    n = len(x)
    centered = x - np.mean(x)
    var = float(np.sum(centered**2) / (n - 1))
    m4 = float(np.mean(centered**4))
    se = math.sqrt(max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n)
    return _estimate(var, se, n, confidence_level, lo=0.0)


def simulate_path(model: DemandModel, horizon: float, stream: RngStream = RngStream()) -> List[PathEvent]:
    """Demand jumps of one path on ``(0, horizon)`` in time order."""
    if not horizon > 0:
        raise DomainError(f"horizon must be > 0, got {horizon!r}")
    mu, alpha, lam, lam_c, shape, rate = _model_args(model)
    times, sizes, sources = K.path_events(
        alpha, lam, lam_c, shape, rate, float(horizon), np.uint64(stream.seed), np.uint64(stream.path)
    )
    return [PathEvent(float(t), float(s), _SOURCES[int(c)]) for t, s, c in zip(times, sizes, sources)]


def sample_fpt(model: DemandModel, policy: Policy, n: int, stream: RngStream = RngStream()) -> float:
    """Exact time demand first reaches ``a + (n - 1) Q`` on one path."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    level = float(policy.threshold(n))
    return float(
        K.passage_times(*_model_args(model), level, np.uint64(stream.seed), np.uint64(stream.path), 1)[0]
    )


def sample_fpts(model: DemandModel, policy: Policy, n: int, paths: int, seed: int = 42) -> np.ndarray:
    """Passage times of paths ``0 .. paths - 1``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    level = float(policy.threshold(n))
    return _batched(K.passage_times, (*_model_args(model), level), _check_seed(seed), int(paths))


def sample_demand(model: DemandModel, s: float, paths: int, seed: int = 42) -> np.ndarray:
    """Samples of ``D_s``."""
    if not s >= 0:
        raise DomainError(f"s must be >= 0, got {s!r}")
    return _batched(K.demand_values, (*_model_args(model), float(s)), _check_seed(seed), int(paths))


def simulate_policy_paths(model: DemandModel, policy: Policy, cfg: McConfig) -> PathFunctionals:
    """Per-path functionals on ``[0, cfg.horizon]``."""
    args = (
        *_model_args(model),
        policy.initial_stock,
        policy.reorder_offset,
        policy.order_quantity,
        float(cfg.horizon),
    )
    out = _batched(K.policy_paths, args, cfg.seed, cfg.paths)
    return PathFunctionals(float(cfg.horizon), *(np.ascontiguousarray(out[:, k]) for k in range(6)))


def estimate_fpt_moments(
    model: DemandModel, policy: Policy, n: int, cfg: McConfig
) -> Tuple[McEstimate, McEstimate]:
    """Mean and variance of the ``n``-th order time from ``cfg.paths`` exact samples."""
    x = sample_fpts(model, policy, n, cfg.paths, cfg.seed)
    return summarize(x, cfg.confidence_level), _variance_estimate(x, cfg.confidence_level)


def estimate_cost(
    model: DemandModel, policy: Policy, rates: CostRates, t: float, cfg: McConfig
) -> McCostBreakdown:
    """Ordering, holding and stockout cost over ``[0, t]`` from exact paths.

    ``t`` overrides ``cfg.horizon``.
    """
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t!r}")
    run = simulate_policy_paths(model, policy, McConfig(cfg.paths, float(t), cfg.seed, cfg.confidence_level))
    ordering = rates.ordering * policy.order_quantity * run.orders
    holding = rates.holding * run.inventory_area
    stockout = rates.stockout * run.stockout_area
    cl = cfg.confidence_level
    return McCostBreakdown(
        ordering=summarize(ordering, cl),
        holding=summarize(holding, cl),
        stockout=summarize(stockout, cl),
        total=summarize(ordering + holding + stockout, cl),
        horizon=float(t),
        without_stockout=summarize(ordering + holding, cl),
    )


def estimate_tail(model: DemandModel, s: float, b: float, cfg: McConfig) -> McEstimate:
    """Frequency of ``D_s >= b`` with a Wald interval."""
    if not b > 0:
        raise DomainError(f"b must be > 0, got {b!r}")
    d = sample_demand(model, s, cfg.paths, cfg.seed)
    hits = d >= b - K.TIE_RTOL * max(1.0, abs(b))
    p = float(np.count_nonzero(hits)) / cfg.paths
    se = math.sqrt(p * (1.0 - p) / cfg.paths)
    return _estimate(p, se, cfg.paths, cfg.confidence_level, lo=0.0, hi=1.0)


def estimate_order_identity(
    model: DemandModel, policy: Policy, t: float, cfg: McConfig
) -> Tuple[McEstimate, McEstimate]:
    """Estimates of ``sum_n (t P(T_n < t) - E[T_n; T_n < t])`` and ``int_0^t E[R_s] ds``.

    The first is built from order times, the second from the running order
    count; both come from the same paths.
    """
    run = simulate_policy_paths(model, policy, McConfig(cfg.paths, float(t), cfg.seed, cfg.confidence_level))
    by_times = float(t) * run.orders - run.order_time_sum
    return summarize(by_times, cfg.confidence_level), summarize(run.order_area, cfg.confidence_level)
