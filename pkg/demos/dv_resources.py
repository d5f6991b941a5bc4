"""How many single photons does a heralded CSIGN resource state cost?"""

from tcsign import dv_montecarlo as dv

# Ideal multiplexing gives closed-form expectations.
for route in dv.ROUTES:
    print(f"{route:12s} expected sources per state: {float(dv.expected_cost_res_state(route)):.1f}")

# A finite budget is split between factories and the final joining step;
# the chance of getting at least one state grows with the budget.
grid = range(200, 2601, 400)
rng = dv.RngStream(7)
for route in ("knill", "cluster_adv"):
    curve = dv.simulate_res_state_curve(route, grid, 2000, rng)
    print(route, " ".join(f"{n}:{p:.2f}" for _, n, p, *_ in curve.rows()))

# Bell measurements boosted by GHZ ancillas: success 1 - 2^-N, but the
# ancillas grow quickly in price.
for N in (4, 5, 6):
    cost, n, p_full = dv.grice_monte_carlo_cost(N, 300, rng)
    print(f"N={N}  simulated {cost:9.0f}  rough estimate {dv.grice_cost_estimate(N):9.0f}")

# With perfect fidelity, the quality of gate teleportation is its success.
print("quality, standard vs advanced Bell measurement:",
      dv.dv_quality(1, 0.5), dv.dv_quality(1, 0.75))
