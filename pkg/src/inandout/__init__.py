"""Uniform sampling from compact membership-oracle bodies.

The package couples four pieces:

* `bodies`      -- membership oracles with volume-growth certificates
* `planner`     -- the full run schedule (T, S, h, N, ...) for a target
                   accuracy, plus consistency and error-bound helpers
* `sampler`     -- the In-and-Out chain and its idealized variant
* `diagnostics` -- Monte Carlo falsification checks of every bound
* `specfun`     -- chi tails and the closed-form inequalities behind them
"""

from . import bodies, cli, diagnostics, planner, sampler, specfun
from .bodies import (
    Body,
    CertificateError,
    GrowthCertificate,
    GrowthSource,
    exclusion,
    make_ball,
    make_box,
    make_halfspace_polytope,
    naive_sandwich_certificate,
    sample_uniform,
    star_shaped,
    union,
    with_growth,
)
from .planner import (
    Plan,
    PlanInputs,
    PlanOverflowError,
    check_plan_consistency,
    expected_total_trials_bound,
    plan,
    renyi_error_bound,
)
from .sampler import (
    EnsembleResult,
    RunResult,
    backward_step,
    derive_seed,
    forward_step,
    make_rng,
    run_ensemble,
    run_in_and_out,
    run_proximal_ideal,
)

__version__ = "0.1.0"
