"""The law of cumulative demand and the expected number of orders.

Conditioning on the number i of unit jumps and j of random jumps by time s
turns P(D_s >= b) into a double Poisson mixture of gamma survival functions.
Summing that tail over the thresholds a, a + Q, a + 2Q, ... gives E[R_t], the
expected number of orders placed by t.

Run:  python demos/02_demand_law.py
"""
import time

from levy_inventory import DemandModel, Gamma, Policy, demand_tail, expected_orders, mean_rate
from levy_inventory.montecarlo import McConfig, estimate_tail, simulate_policy_paths

model = DemandModel(drift=0.8, unit_jump_size=1.2, unit_jump_rate=0.7, compound_rate=1.5, jump_dist=Gamma(2.2, 3.0))
policy = Policy(initial_stock=10.0, reorder_offset=2.0, order_quantity=3.0)
print(f"mean demand rate m = {mean_rate(model):.4f}")

print("\nP(D_s >= b): series vs 1e6 simulated paths")
for s, b in ((0.5, 1.0), (2.0, 4.0), (5.0, 12.0), (5.0, 20.0)):
    est = estimate_tail(model, s, b, McConfig(paths=1_000_000, seed=3))
    print(f"  s={s:4.1f} b={b:5.1f}  series {demand_tail(model, s, b):.6f}  MC {est.mean:.6f} +- {est.std_error:.6f}")

print("\nE[R_t]: series vs simulated order counts (1e5 paths)")
for t in (1.0, 5.0, 20.0):
    run = simulate_policy_paths(model, policy, McConfig(paths=100_000, horizon=t, seed=4))
    se = run.orders.std(ddof=1) / len(run.orders) ** 0.5
    print(f"  t={t:5.1f}  series {expected_orders(model, policy, t):.5f}  MC {run.orders.mean():.5f} +- {se:.5f}")

print("\nLong horizons: most (i, j) cells average floor((D - a)/Q) + 1 through a short Fourier series")
for t in (100.0, 1000.0, 5000.0):
    start = time.perf_counter()
    r = expected_orders(model, policy, t)
    elapsed = time.perf_counter() - start
    print(f"  t={t:6.0f}  E[R_t] = {r:.4f}   m t / Q = {mean_rate(model) * t / policy.order_quantity:.4f}   ({elapsed:.2f} s)")
offset = 0.5 - policy.reorder_offset / policy.order_quantity
print(f"  E[R_t] - m t / Q settles at 1/2 - a/Q = {offset:.4f}: the fractional part of (D - a)/Q turns uniform")
