"""
Planning a sampling schedule
============================

Given the target accuracy and the body's certificate, the planner
derives every run parameter: iteration count T, failure budget S, step
size h, per-iteration trial threshold N, and the burn-in horizon.  The
derivation is deterministic arithmetic, so schedules are reproducible
constants, and a consistency report re-checks the inequalities the
guarantees rest on.
"""

import math

from inandout import bodies, planner

annulus = bodies.exclusion(
    bodies.make_ball([0.0, 0.0], 1.0),
    bodies.make_ball([0.0, 0.0], 0.5),
    0.75 * math.pi,
)

# C_PI is the Poincare-type constant of the uniform law on the body; for
# a body of diameter D it is at most D^2, which is the honest default
# when nothing sharper is known.
C_PI = 2.0**2

print("schedules for the annulus at several accuracy targets:")
print(f"{'eps':>6} {'T':>10} {'h':>12} {'N':>14} {'S':>14} {'burn-in':>9}")
for eps in (0.4, 0.2, 0.1, 0.05):
    inputs = planner.PlanInputs(
        q=2, eps=eps, M=1, C_PI=C_PI,
        alpha=annulus.growth.alpha, beta=annulus.growth.beta, n=annulus.dim,
    )
    p = planner.plan(inputs)
    print(f"{eps:6.2f} {p.T:10d} {p.h:12.3e} {p.N:14d} {p.S:14.3e} {p.T0:9d}")

# the consistency report enumerates the inequalities; an empty list of
# violations is what "the schedule is sound" means operationally
inputs = planner.PlanInputs(q=2, eps=0.2, M=1, C_PI=C_PI,
                            alpha=annulus.growth.alpha,
                            beta=annulus.growth.beta, n=annulus.dim)
p = planner.plan(inputs)
report = planner.check_plan_consistency(p, inputs)
print(f"\nconsistency ok: {report.ok}   violations: {list(report.violations)}")

# the guaranteed divergence error after T iterations, plus the a-priori
# bound on the total number of membership-oracle calls
err = planner.renyi_error_bound(p, inputs, eta_actual=p.eta)
trials = planner.expected_total_trials_bound(inputs)
print(f"divergence bound at full T: {err:.4f} (target eps = {inputs.eps})")
print(f"expected total oracle calls bounded by {trials:.3e}")

# a cold start pays a burn-in: warmness M enters only through log M
for M in (1, 10, 1000):
    pm = planner.plan(planner.PlanInputs(q=2, eps=0.2, M=M, C_PI=C_PI,
                                         alpha=annulus.growth.alpha,
                                         beta=annulus.growth.beta,
                                         n=annulus.dim))
    print(f"M={M:5d}: T={pm.T:7d}  burn-in T0={pm.T0:6d}")

# absurd requests fail loudly instead of scheduling a multi-year run
try:
    planner.plan(planner.PlanInputs(q=8, eps=0.01, M=1e6, C_PI=1e4,
                                    alpha=1e6, beta=50.0, n=50))
except planner.PlanOverflowError as e:
    print(f"\nover-budget request rejected: {e}")
