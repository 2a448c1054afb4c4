"""
Checking the guarantees empirically
===================================

Three quantitative bounds underpin the schedule, all statements about
the smoothed stationary law (draw a uniform point, add one Gaussian
step):

  escape   -- mass found at distance > r from the body falls off like a
              chi-square tail in r/sqrt(h);
  failure  -- the chance an in-step exhausts all N attempts is <= 3/S;
  trials   -- the expected number of attempts per in-step is
              <= 16 * alpha * log S.

Each check estimates the left side by Monte Carlo, compares it with the
bound, and reports "satisfied" or "violated_beyond_3se".  The bounds
assume step-size regimes; out-of-regime requests are refused rather
than silently reported.
"""

import dataclasses
import math

from inandout import bodies, diagnostics, planner, sampler

disk = bodies.make_ball([0.0, 0.0], 1.0)
inputs = planner.PlanInputs(q=2, eps=0.2, M=1, C_PI=1,
                            alpha=1.0, beta=1.0, n=2)
plan = planner.plan(inputs)
print(f"disk schedule: h={plan.h:.3e}, N={plan.N}, S={plan.S:.3e}\n")

# escape mass at a few distances
for i, r in enumerate((0.25, 0.5, 1.0)):
    rng = sampler.make_rng(sampler.derive_seed(100, i))
    chk = diagnostics.stationary_escape_check(disk, plan.h, r, 50_000, rng)
    print(f"escape r={r:4.2f}: observed {chk.empirical:.2e}  "
          f"bound {chk.theoretical_bound:.3e}  -> {chk.verdict}")

# exhausting N attempts is rarer than 3/S
rng = sampler.make_rng(sampler.derive_seed(200, 0))
chk = diagnostics.stationary_failure_check(disk, plan, 4_000, rng)
print(f"\nfailure:      observed {chk.empirical:.2e}  "
      f"bound {chk.theoretical_bound:.3e}  -> {chk.verdict}")

# attempts per in-step stay near 1 for a fat body, far below the bound
rng = sampler.make_rng(sampler.derive_seed(300, 0))
chk = diagnostics.expected_trials_check(disk, plan, 4_000, rng)
print(f"trials:       observed {chk.empirical:8.2f}  "
      f"bound {chk.theoretical_bound:8.2f}  -> {chk.verdict}")

# local conductance at a single point: the per-attempt hit probability
for y in ([0.0, 0.0], [0.9, 0.0], [1.1, 0.0]):
    p, se = diagnostics.local_conductance_mc(disk, y, plan.h, 50_000,
                                             sampler.make_rng(9))
    print(f"conductance at {y}: {p:.4f} +- {se:.4f}")

# the closed form for E[min(geometric, N)] used by the trials check
print(f"\nE[min(G(0.5), 3)] = "
      f"{diagnostics.expected_trials_closed_form(0.5, 3)} (exactly 1.75)")

# out-of-regime step sizes are refused with a reason
try:
    diagnostics.stationary_escape_check(disk, 0.5, 1.0, 100,
                                        sampler.make_rng(1))
except ValueError as e:
    print(f"\nrefused out-of-regime check: {e}")

# the same refusal protects the failure bound when N is too small
try:
    diagnostics.stationary_failure_check(disk, dataclasses.replace(plan, N=10),
                                         100, sampler.make_rng(1))
except ValueError as e:
    print(f"refused under-provisioned check: {e}")
