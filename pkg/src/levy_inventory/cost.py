"""Expected inventory level, finite-horizon expected cost and long-run average cost.

With stockout cost neglected the expected total cost over ``[0, t]`` is

    C_o Q E[R_t] + C_h (x t - m t^2 / 2 + Q int_0^t E[R_s] ds)

where ``m`` is the mean demand rate and ``E[R_s]`` the expected number of
orders placed before ``s``.  The time integral has no closed antiderivative and
is evaluated by composite quadrature.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, pdtr

from ._workers import worker_count
from .distribution import SeriesControl, expected_orders
from .errors import DomainError, NumericalError, ParameterError, QuadratureWarning
from .model import CostRates, DemandModel, Policy, mean_rate

__all__ = [
    "QuadratureControl",
    "CostBreakdown",
    "SweepRow",
    "SweepResult",
    "expected_inventory_level",
    "integrated_expected_orders",
    "expected_total_cost",
    "long_run_average_cost",
    "cost_sweep",
]

# relative change under node doubling above which a QuadratureWarning is issued
RESOLUTION_RTOL = 1e-6
# candidate jump locations scanned before giving up on breakpoint splitting
_SCAN_CAP = 2_000_000
# retained breakpoints allowed per uniform interval
_BREAKS_PER_NODE = 64
# compound counts up to this order leave a visible kink at each jump time
_KINK_ORDER = 3
# evaluations next to a jump are moved this far (relative) into the smooth side
_NUDGE = 1e-9


@dataclass(frozen=True)
class QuadratureControl:
    """Resolution of the time integral of ``E[R_s]``.

    ``nodes`` is the number of uniform intervals on ``[0, t]``; Simpson's
    rule pairs them, so it needs an even count.
    """

    nodes: int = 256
    scheme: str = "simpson"

    def __post_init__(self):
        if isinstance(self.nodes, bool) or not isinstance(self.nodes, int) or self.nodes < 8:
            raise ParameterError("nodes must be an integer >= 8")
        if self.scheme not in ("simpson", "trapezoid"):
            raise ParameterError(f"scheme must be 'simpson' or 'trapezoid', got {self.scheme!r}")
        if self.scheme == "simpson" and self.nodes % 2:
            raise ParameterError("simpson requires an even number of nodes")

    def doubled(self) -> "QuadratureControl":
        return QuadratureControl(nodes=2 * self.nodes, scheme=self.scheme)


@dataclass(frozen=True)
class CostBreakdown:
    """Cost components over the horizon ``[0, horizon]``."""

    ordering: float
    holding: float
    stockout: float
    total: float
    horizon: float

    @classmethod
    def assemble(cls, ordering, holding, stockout, horizon):
        return cls(
            ordering=float(ordering),
            holding=float(holding),
            stockout=float(stockout),
            total=float(ordering) + float(holding) + float(stockout),
            horizon=float(horizon),
        )


@dataclass(frozen=True)
class SweepRow:
    a: float
    Q: float
    breakdown: Optional[CostBreakdown]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.breakdown is not None


@dataclass(frozen=True)
class SweepResult:
    """Sweep table in a-major order and the index of its cheapest row."""

    rows: List[SweepRow]
    argmin: Optional[int]

    @property
    def best(self) -> Optional[SweepRow]:
        return None if self.argmin is None else self.rows[self.argmin]


def expected_inventory_level(
    model: DemandModel, policy: Policy, t: float, ctrl: SeriesControl = SeriesControl()
) -> float:
    """``E[X_t] = x - m t + Q E[R_t]``."""
    t = float(t)
    if not t >= 0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    if t == 0.0:
        return policy.initial_stock
    return (
        policy.initial_stock
        - mean_rate(model) * t
        + policy.order_quantity * expected_orders(model, policy, t, ctrl)
    )


def _jump_times(model, policy, t, ctrl, nodes):
    """Times in ``(0, t]`` where ``E[R_s]`` jumps by a non-negligible amount.

    Only the no-random-jump part of the mixture has jumps in ``s``: with ``i``
    unit jumps, demand ``mu s + alpha i`` meets threshold ``K`` at
    ``s = (K - alpha i) / mu``.  Cells with a few random jumps have kinks at
    the same times, so they count toward the weight of each location.  Returns ``None`` when there are too many to
    resolve individually.
    """
    mu = model.drift
    if mu <= 0.0:
        return np.empty(0), np.empty(0)
    tol = ctrl.tail_mass_tol
    horizon = t
    if model.has_compound:
        # past this time the no-jump and few-jump cells carry less than tol
        lam_c = model.compound_rate
        horizon = min(t, brentq(lambda s: pdtr(_KINK_ORDER, lam_c * s) - tol, 0.0, 1e3 / lam_c + 1e3))
    if model.has_unit_jumps:
        lam = model.unit_jump_rate
        # the largest index whose pmf can exceed tol somewhere in (0, horizon]
        i_hi = int(math.ceil(lam * horizon + 10.0 * math.sqrt(lam * horizon) + 40.0))
        i = np.arange(i_hi + 1)
    else:
        i = np.zeros(1, dtype=np.int64)
    alpha = model.unit_jump_size if model.has_unit_jumps else 0.0
    start = np.asarray(policy.orders_triggered(alpha * i), dtype=np.int64)
    stop = np.asarray(policy.orders_triggered(mu * horizon + alpha * i), dtype=np.int64)
    counts = np.maximum(stop - start, 0)
    total = int(counts.sum())
    if total > _SCAN_CAP:
        return None
    if total == 0:
        return np.empty(0), np.empty(0)
    ii = np.repeat(i, counts)
    offset = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    level = policy.reorder_offset + (np.repeat(start, counts) + offset) * policy.order_quantity
    s = (level - alpha * ii) / mu
    weight = np.ones(total)
    if model.has_unit_jumps:
        rate = model.unit_jump_rate * s
        weight = np.exp(ii * np.log(np.maximum(rate, 1e-300)) - rate - gammaln(ii + 1.0))
    if model.has_compound:
        # cells with j <= _KINK_ORDER random jumps are not smooth at s either
        weight = weight * pdtr(_KINK_ORDER, model.compound_rate * s)
    keep = (s > 0.0) & (s <= t) & (weight >= tol)
    s, level = s[keep], level[keep]
    if len(s) > _BREAKS_PER_NODE * nodes:
        return None
    order = np.argsort(s, kind="stable")
    return s[order], level[order]


def _quadrature_weights(t, quad, breaks, nudges):
    """Map from evaluation point to weight for the integral over ``[0, t]``."""
    weights: Dict[float, float] = {}

    def add(point, w):
        weights[point] = weights.get(point, 0.0) + w

    def piece(u, v, u_jump, v_jump, du, dv):
        # one panel between consecutive knots; jump ends are evaluated inside
        if v - u <= du + dv:
            return
        lo = u + du if u_jump else u
        hi = v - dv if v_jump else v
        if quad.scheme == "simpson":
            h = (v - u) / 6.0
            add(lo, h)
            add(0.5 * (u + v), 4.0 * h)
            add(hi, h)
        else:
            add(lo, 0.5 * (v - u))
            add(hi, 0.5 * (v - u))

    grid = np.linspace(0.0, t, quad.nodes + 1)
    step = grid[1] - grid[0]
    # attach breaks to uniform intervals; a break on a node marks that node
    node_jump = np.zeros(len(grid), dtype=bool)
    node_nudge = np.zeros(len(grid))
    inner: Dict[int, list] = {}
    for s, d in zip(breaks, nudges):
        k = int(round(s / step))
        if abs(s - grid[k]) <= d:
            node_jump[k] = True
            node_nudge[k] = max(node_nudge[k], d)
            continue
        inner.setdefault(min(int(s // step), quad.nodes - 1), []).append((s, d))

    span = 2 if quad.scheme == "simpson" else 1
    for k0 in range(0, quad.nodes, span):
        k1 = k0 + span
        inside = []
        for k in range(k0, k1):
            inside.extend(inner.get(k, []))
        if span == 2 and node_jump[k0 + 1]:
            inside.append((grid[k0 + 1], node_nudge[k0 + 1]))
        if not inside and not node_jump[k0] and not node_jump[k1]:
            if quad.scheme == "simpson":
                add(grid[k0], step / 3.0)
                add(grid[k0 + 1], 4.0 * step / 3.0)
                add(grid[k1], step / 3.0)
            else:
                add(grid[k0], 0.5 * step)
                add(grid[k1], 0.5 * step)
            continue
        inside.sort()
        knots = [(grid[k0], node_nudge[k0], node_jump[k0])]
        for s, d in inside:
            if s - knots[-1][0] <= 2.0 * max(d, knots[-1][1]):
                # coincident jumps are resolved together
                prev = knots[-1]
                knots[-1] = (prev[0], max(prev[1], d), True)
            else:
                knots.append((s, d, True))
        knots.append((grid[k1], node_nudge[k1], node_jump[k1]))
        for (u, du, uj), (v, dv, vj) in zip(knots[:-1], knots[1:]):
            piece(u, v, uj, vj, du, dv)
    return weights


def _evaluate(fn: Callable[[float], float], points: Sequence[float], cache: Dict[float, float]):
    todo = [p for p in points if p not in cache]
    workers = min(worker_count(), max(1, len(todo)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(fn, todo))
    else:
        values = [fn(p) for p in todo]
    cache.update(zip(todo, values))


def _integral(model, policy, t, series, quad, cache):
    found = _jump_times(model, policy, t, series, quad.nodes)
    if found is None:
        warnings.warn(
            "too many jump locations in E[R_s] to resolve; using the uniform grid only",
            QuadratureWarning,
            stacklevel=3,
        )
        breaks, nudges = np.empty(0), np.empty(0)
    else:
        breaks, level = found
        nudges = _NUDGE * np.maximum(1.0, np.abs(level)) / model.drift
    weights = _quadrature_weights(t, quad, breaks, nudges)
    points = sorted(weights)

    def fn(s):
        return expected_orders(model, policy, s, series)

    _evaluate(fn, points, cache)
    return math.fsum(weights[p] * cache[p] for p in points)


def integrated_expected_orders(
    model: DemandModel,
    policy: Policy,
    t: float,
    series: SeriesControl = SeriesControl(),
    quad: QuadratureControl = QuadratureControl(),
) -> float:
    """``int_0^t E[R_s] ds`` by composite quadrature.

    The uniform grid is refined at the times where ``E[R_s]`` jumps (demand
    with no random jumps meeting a threshold), and the integrand is sampled
    just inside each smooth piece.
    """
    t = float(t)
    if not t >= 0:
        raise DomainError(f"t must be >= 0, got {t!r}")
    if t == 0.0:
        return 0.0
    return _integral(model, policy, t, series, quad, {})


def expected_total_cost(
    model: DemandModel,
    policy: Policy,
    rates: CostRates,
    t: float,
    series: SeriesControl = SeriesControl(),
    quad: QuadratureControl = QuadratureControl(),
    check_resolution: bool = True,
) -> CostBreakdown:
    """Expected ordering and holding cost over ``[0, t]``; stockout is reported as 0.

    Parameters
    ----------
    check_resolution : bool
        Recompute the time integral with twice the nodes and issue a
        :class:`QuadratureWarning` if the total moves by more than ``1e-6``
        relative.
    """
    t = float(t)
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t!r}")
    x, qty = policy.initial_stock, policy.order_quantity
    m = mean_rate(model)
    ordering = holding = 0.0
    if rates.ordering > 0:
        ordering = rates.ordering * qty * expected_orders(model, policy, t, series)
    if rates.holding == 0:
        return CostBreakdown.assemble(ordering, 0.0, 0.0, t)

    cache: Dict[float, float] = {}
    area = _integral(model, policy, t, series, quad, cache)
    holding = rates.holding * (x * t - 0.5 * m * t * t + qty * area)
    result = CostBreakdown.assemble(ordering, holding, 0.0, t)
    if check_resolution:
        fine = _integral(model, policy, t, series, quad.doubled(), cache)
        fine_total = ordering + rates.holding * (x * t - 0.5 * m * t * t + qty * fine)
        change = abs(fine_total - result.total)
        if change > RESOLUTION_RTOL * max(abs(fine_total), 1e-300):
            warnings.warn(
                f"doubling quadrature nodes to {2 * quad.nodes} changed the total cost by "
                f"{change / abs(fine_total):.3g} relative",
                QuadratureWarning,
                stacklevel=2,
            )
    return result


def long_run_average_cost(model: DemandModel, rates: CostRates, x: float) -> float:
    """``C_o m + C_h x``, the claimed large-``t`` limit of the cost per unit time."""
    return rates.ordering * mean_rate(model) + rates.holding * float(x)


def cost_sweep(
    model: DemandModel,
    rates: CostRates,
    initial_stock: float,
    a_grid: Sequence[float],
    Q_grid: Sequence[float],
    t: float,
    series: SeriesControl = SeriesControl(),
    quad: QuadratureControl = QuadratureControl(),
    check_resolution: bool = False,
) -> SweepResult:
    """Expected total cost on the ``a_grid x Q_grid`` product, a-major.

    A cell whose parameters are invalid or whose evaluation fails numerically
    is kept in the table with its error message and excluded from the argmin.
    """
    if not len(a_grid) or not len(Q_grid):
        raise ParameterError("a_grid and Q_grid must be nonempty")
    for label, grid in (("a", a_grid), ("Q", Q_grid)):
        for value in grid:
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{label} grid entries must be > 0, got {value!r}")
    cells = [(float(a), float(q)) for a in a_grid for q in Q_grid]

    def run(cell):
        a, q = cell
        try:
            policy = Policy(initial_stock, a, q)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", QuadratureWarning)
                bd = expected_total_cost(model, policy, rates, t, series, quad, check_resolution)
            return SweepRow(a, q, bd)
        except (ParameterError, DomainError, NumericalError) as exc:
            return SweepRow(a, q, None, f"{type(exc).__name__}: {exc}")

    workers = min(worker_count(), len(cells))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    valid = [k for k, r in enumerate(rows) if r.ok]
    argmin = min(valid, key=lambda k: rows[k].breakdown.total) if valid else None
    return SweepResult(rows=rows, argmin=argmin)
