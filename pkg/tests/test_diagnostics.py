"""Independent checks behind the two acceptance criteria that stay red.

The closed-form reorder-time moments divide the threshold by the mean demand
rate, which ignores the overshoot of the threshold at the crossing.  The large-t
cost per unit time settles at ``C_o m + C_h (x - a + Q/2)`` for non-lattice
demand, not at ``C_o m + C_h x``.  Both facts are checked here against
estimates that share no code with the closed forms.
"""
import math

import pytest

from levy_inventory import (
    CostRates,
    DemandModel,
    Exponential,
    Gamma,
    Policy,
    demand_tail,
    expected_total_cost,
    fpt_moments,
    long_run_average_cost,
    mean_rate,
)
from levy_inventory.montecarlo import McConfig, estimate_fpt_moments
from oracles import quad_integral

CASES = [
    ("drifted Poisson", DemandModel(1.0, 1.0, 1.0), Policy(10.0, 2.0, 3.0), 1),
    ("exponential jumps", DemandModel(1.0, 0.0, 0.0, 2.0, Exponential(4.0)), Policy(10.0, 3.0, 1.0), 2),
    ("gamma jumps", DemandModel(1.0, 0.0, 0.0, 2.0, Gamma(2.5, 4.0)), Policy(10.0, 3.0, 1.0), 2),
    ("generalized", DemandModel(1.0, 0.5, 1.0, 2.0, Gamma(2.5, 4.0)), Policy(10.0, 3.0, 1.0), 2),
]


def tail_moments(model, level):
    """E[T] and Var[T] from P(T > t) = P(D_t < level), which vanishes past level / mu."""
    upper = level / model.drift
    kinks = [(level - i * model.unit_jump_size) / model.drift for i in range(50)] if model.has_unit_jumps else []

    def survival(t):
        return 1.0 - demand_tail(model, t, level) if t > 0 else 1.0

    mean = quad_integral(survival, upper, kinks)
    second = 2.0 * quad_integral(lambda t: t * survival(t), upper, kinks)
    return mean, second - mean * mean


@pytest.mark.parametrize("label, model, policy, n", CASES, ids=[c[0] for c in CASES])
def test_simulated_moments_match_tail_integral(label, model, policy, n):
    mean, var = tail_moments(model, policy.threshold(n))
    mc_mean, mc_var = estimate_fpt_moments(model, policy, n, McConfig(paths=100_000, seed=42))
    assert abs(mc_mean.z_score(mean)) <= 3
    assert abs(mc_var.z_score(var)) <= 3


@pytest.mark.parametrize("label, model, policy, n", CASES, ids=[c[0] for c in CASES])
def test_closed_form_mean_misses_the_overshoot(label, model, policy, n):
    mean, _ = tail_moments(model, policy.threshold(n))
    closed = fpt_moments(model, policy, n).mean
    # Wald: E[D_T] = m E[T] and D_T >= level, so the true mean exceeds level / m
    assert closed == pytest.approx(policy.threshold(n) / mean_rate(model), rel=1e-14)
    assert mean > closed * 1.02


def test_exponential_overshoot_is_memoryless():
    # crossings by a jump overshoot by Exp(eta); by drift they overshoot by 0
    model, level = DemandModel(1.0, 0.0, 0.0, 2.0, Exponential(4.0)), 4.0
    mean, _ = tail_moments(model, level)
    m = mean_rate(model)
    jump_share = (mean * m - level) * 4.0
    assert 0 < jump_share < 1
    assert mean == pytest.approx(49 / 18, rel=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("a, q", [(1.0, 10.0), (5.0, 1.0)])
def test_long_run_cost_tracks_mean_stock_under_uniform_phase(a, q):
    model, rates, x, t = DemandModel(1.0, 1.0, 1.0, 1.0, Exponential(2.0)), CostRates(2.0, 0.5), 10.0, 2000.0
    per_time = expected_total_cost(model, Policy(x, a, q), rates, t, check_resolution=False).total / t
    corrected = rates.ordering * mean_rate(model) + rates.holding * (x - a + q / 2)
    assert per_time == pytest.approx(corrected, rel=1e-3)
    assert not math.isclose(per_time, long_run_average_cost(model, rates, x), rel_tol=0.02)
