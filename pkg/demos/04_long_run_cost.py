"""What the cost per unit time settles to.

long_run_average_cost returns C_o m + C_h x, which does not depend on a or Q.
Evaluating the finite-horizon expected cost at growing t shows where the cost
per unit time actually goes.  Once orders start, the stock is

    X_t = x - a + Q - Q frac((D_t - a) / Q),

and for demand that is not confined to a lattice the fractional part becomes
uniform, so E[X_t] tends to x - a + Q/2.  The two limits agree only when a = Q/2.
With drift and unit jumps alone, D_t sits on a lattice only at isolated times,
so the time average still sees a uniform phase; the last block shows this.

Run:  python demos/04_long_run_cost.py   (about 20 seconds)
"""
from levy_inventory import (
    CostRates,
    DemandModel,
    Exponential,
    Policy,
    QuadratureControl,
    expected_total_cost,
    long_run_average_cost,
    mean_rate,
)

rates = CostRates(ordering=2.0, holding=0.5)
x = 10.0


def trace(model, a, q, horizons):
    m = mean_rate(model)
    claimed = long_run_average_cost(model, rates, x)
    uniform_phase = rates.ordering * m + rates.holding * (x - a + q / 2)
    print(f"  a={a:g} Q={q:g}: C_o m + C_h x = {claimed:.4f}, C_o m + C_h (x - a + Q/2) = {uniform_phase:.4f}")
    for t in horizons:
        # without random jumps E[R_s] steps at every (K - alpha i) / mu; the grid must keep up with them
        quad = QuadratureControl(nodes=256 if model.has_compound else max(256, 4 * int(t)))
        bd = expected_total_cost(model, Policy(x, a, q), rates, t, quad=quad, check_resolution=False)
        print(f"    t={t:7.0f}  cost/t = {bd.total / t:.5f}")


print("drift + unit jumps + exponential jumps (non-lattice)")
model = DemandModel(1.0, 1.0, 1.0, 1.0, Exponential(2.0))
for a, q in ((1.0, 1.0), (1.0, 10.0), (5.0, 1.0), (5.0, 10.0)):
    trace(model, a, q, (10.0, 100.0, 1000.0))

print("\ndrift + unit jumps with mu = alpha = lambda = 1 (demand on the integer lattice at integer t)")
trace(DemandModel(1.0, 1.0, 1.0), 2.0, 3.0, (10.0, 100.0, 1000.0))
trace(DemandModel(1.0, 1.0, 1.0), 2.0, 3.5, (10.0, 100.0, 1000.0))
print("  drift spreads D_t between lattice points at non-integer t, so the time average still sees a uniform phase")
