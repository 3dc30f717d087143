"""Demand subordinator, replenishment policy and cost rates.

Cumulative demand is

    D_t = mu * t + alpha * N_t + sum_{k <= N'_t} J_k

with N, N' independent Poisson processes of rates ``lam`` and ``lam_c`` and
i.i.d. jumps J_k that are exponential or gamma distributed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "Exponential",
    "Gamma",
    "JumpDistribution",
    "DemandModel",
    "Policy",
    "CostRates",
    "laplace_exponent",
    "psi_derivatives_at_zero",
    "mean_rate",
]


# demand within this relative slack of a threshold counts as having reached it
TIE_RTOL = 1e-12


def tie_slack(level):
    """Absolute slack used when deciding ``demand >= level`` in floating point."""
    return TIE_RTOL * np.maximum(1.0, np.abs(level))


def _require(condition, message):
    if not condition:
        raise ParameterError(message)


def _finite(value):
    return isinstance(value, (int, float)) and math.isfinite(value)


@dataclass(frozen=True)
class Exponential:
    """Exponential jump sizes with rate ``rate`` (mean ``1 / rate``)."""

    rate: float

    def __post_init__(self):
        _require(_finite(self.rate) and self.rate > 0, "jump rate eta must be > 0")

    @property
    def shape(self) -> float:
        return 1.0

    @property
    def mean(self) -> float:
        return 1.0 / self.rate


@dataclass(frozen=True)
class Gamma:
    """Gamma jump sizes with shape ``shape`` and rate ``rate``."""

    shape: float
    rate: float

    def __post_init__(self):
        _require(_finite(self.shape) and self.shape > 0, "jump shape beta must be > 0")
        _require(_finite(self.rate) and self.rate > 0, "jump rate eta must be > 0")

    @property
    def mean(self) -> float:
        return self.shape / self.rate


JumpDistribution = Union[Exponential, Gamma]


@dataclass(frozen=True)
class DemandModel:
    """Drift + unit-jump Poisson + compound-Poisson cumulative demand.

    Parameters
    ----------
    drift : float
        Deterministic demand rate ``mu``.
    unit_jump_size : float
        Size ``alpha`` of each unit-stream jump.
    unit_jump_rate : float
        Arrival rate ``lam`` of the unit-jump stream.
    compound_rate : float
        Arrival rate ``lam_c`` of the random-size jump stream.
    jump_dist : Exponential or Gamma, optional
        Law of the random jump sizes; required iff ``compound_rate > 0``.
    """

    drift: float = 0.0
    unit_jump_size: float = 0.0
    unit_jump_rate: float = 0.0
    compound_rate: float = 0.0
    jump_dist: Optional[JumpDistribution] = None

    def __post_init__(self):
        for name, symbol in (
            ("drift", "mu"),
            ("unit_jump_size", "alpha"),
            ("unit_jump_rate", "lambda"),
            ("compound_rate", "lambda_prime"),
        ):
            value = getattr(self, name)
            _require(_finite(value), f"{symbol} must be a finite number")
            _require(value >= 0, f"{symbol} must be >= 0")
        if self.compound_rate > 0:
            _require(
                isinstance(self.jump_dist, (Exponential, Gamma)),
                "jump_dist is required when lambda_prime > 0",
            )
        else:
            _require(self.jump_dist is None, "jump_dist must be omitted when lambda_prime == 0")
        _require(
            self.drift + self.unit_jump_size * self.unit_jump_rate + self.compound_rate > 0,
            "model is degenerate: mu + alpha*lambda + lambda_prime must be > 0",
        )

    @property
    def has_unit_jumps(self) -> bool:
        return self.unit_jump_size > 0 and self.unit_jump_rate > 0

    @property
    def has_compound(self) -> bool:
        return self.compound_rate > 0


@dataclass(frozen=True)
class Policy:
    """Fixed-order-quantity policy: start at ``initial_stock``, reorder ``order_quantity``
    each time cumulative demand reaches ``reorder_offset + (n - 1) * order_quantity``."""

    initial_stock: float
    reorder_offset: float
    order_quantity: float

    def __post_init__(self):
        for name, symbol in (
            ("initial_stock", "x"),
            ("reorder_offset", "a"),
            ("order_quantity", "Q"),
        ):
            value = getattr(self, name)
            _require(_finite(value), f"{symbol} must be a finite number")
            _require(value > 0, f"{symbol} must be > 0")

    @property
    def reorder_point(self) -> float:
        return self.initial_stock - self.reorder_offset

    def threshold(self, n):
        """Cumulative-demand level that triggers the ``n``-th order."""
        return self.reorder_offset + (np.asarray(n) - 1) * self.order_quantity

    def orders_triggered(self, level):
        """Number of thresholds ``n >= 1`` with ``threshold(n) <= level``.

        Works elementwise on arrays.  A level within :func:`tie_slack` of a
        threshold counts as reaching it, so decimal inputs that meet a
        threshold exactly in real arithmetic are not lost to rounding.
        """
        a, q = self.reorder_offset, self.order_quantity
        level = np.asarray(level, dtype=float)
        level = level + tie_slack(level)
        k = np.floor((level - a) / q) + 1.0
        k = np.clip(k, 0.0, None)
        k = np.where(a + k * q <= level, k + 1.0, k)
        k = np.where((k >= 1.0) & (a + (k - 1.0) * q > level), k - 1.0, k)
        out = k.astype(np.int64)
        return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CostRates:
    """Per-unit ordering cost, holding cost rate and stockout cost rate."""

    ordering: float = 0.0
    holding: float = 0.0
    stockout: float = 0.0

    def __post_init__(self):
        for name, symbol in (("ordering", "C_o"), ("holding", "C_h"), ("stockout", "C_so")):
            value = getattr(self, name)
            _require(_finite(value), f"{symbol} must be a finite number")
            _require(value >= 0, f"{symbol} must be >= 0")


def laplace_exponent(model: DemandModel, theta: float) -> float:
    """``psi(theta) = theta*mu + lam*(exp(theta*alpha) - 1) + lam_c*((eta/(eta-theta))**beta - 1)``.

    Raises
    ------
    DomainError
        If a compound component is present and ``theta >= eta``.
    """
    theta = float(theta)
    value = theta * model.drift
    if model.has_unit_jumps:
        value += model.unit_jump_rate * math.expm1(theta * model.unit_jump_size)
    if model.has_compound:
        dist = model.jump_dist
        if theta >= dist.rate:
            raise DomainError(
                f"laplace exponent diverges for theta >= eta ({theta!r} >= {dist.rate!r})"
            )
        # (eta/(eta-theta))**beta - 1 == expm1(-beta * log1p(-theta/eta))
        value += model.compound_rate * math.expm1(-dist.shape * math.log1p(-theta / dist.rate))
    return value


def psi_derivatives_at_zero(model: DemandModel):
    """Return ``(psi'(0), psi''(0))``."""
    first = model.drift
    second = 0.0
    if model.has_unit_jumps:
        first += model.unit_jump_size * model.unit_jump_rate
        second += model.unit_jump_size**2 * model.unit_jump_rate
    if model.has_compound:
        beta, eta = model.jump_dist.shape, model.jump_dist.rate
        first += model.compound_rate * beta / eta
        second += model.compound_rate * beta * (beta + 1.0) / eta**2
    return first, second


def mean_rate(model: DemandModel) -> float:
    """Long-run demand per unit time, ``E[D_t] / t``."""
    m = model.drift + model.unit_jump_size * model.unit_jump_rate
    if model.has_compound:
        m += model.compound_rate * model.jump_dist.mean
    return m
