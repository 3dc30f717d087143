"""Fixed-order-quantity inventory control under Levy subordinator demand.

Analytic reorder-time transforms and moments, the Poisson-mixture law of
cumulative demand, expected costs, and an exact event-driven simulator used as
an independent check of all of them.
"""
from .cost import (
    CostBreakdown,
    QuadratureControl,
    SweepResult,
    SweepRow,
    cost_sweep,
    expected_inventory_level,
    expected_total_cost,
    integrated_expected_orders,
    long_run_average_cost,
)
from .distribution import SeriesControl, demand_tail, expected_orders, jump_sum_survival, reorder_prob
from .errors import (
    ConvergenceError,
    DomainError,
    NumericalError,
    ParameterError,
    QuadratureWarning,
    TruncationError,
)
from .first_passage import FptMoments, fpt_laplace, fpt_moments, phi_inverse
from .model import (
    CostRates,
    DemandModel,
    Exponential,
    Gamma,
    Policy,
    laplace_exponent,
    mean_rate,
    psi_derivatives_at_zero,
)
from .special import lambert_w0, lambert_w0_of_exp, poisson_pmf, upper_gamma_regularized

__version__ = "0.1.0"
