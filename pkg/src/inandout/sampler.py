"""The In-and-Out chain and its ideal (uncapped) variant.

One iteration from x does two things:

  out-step:  y  = x + sqrt(h) * g,          g  ~ N(0, I_n)
  in-step:   x' = y + sqrt(h) * g_k,        g_k ~ N(0, I_n) i.i.d.,
             keeping the first proposal that lands inside the body.

The in-step retries at most N times; running out of attempts ends the
whole run (Failure).  The ideal variant is the same loop with the
threshold replaced by a practical cap, reported as a distinct outcome
because in exact arithmetic it would keep trying forever.

Randomness: each chain runs on a counter-based Philox generator keyed
by a 64-bit seed.  Per-chain seeds come from `derive_seed`, a frozen
SplitMix64 construction, so ensembles are reproducible and order
independent.  Gaussian variates use numpy's standard_normal (ziggurat);
this transform is part of the frozen contract for regression tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bodies import Body
from .planner import Plan

_M64 = (1 << 64) - 1

SUCCESS = "success"
FAILURE = "failure"
CAP_EXCEEDED = "cap_exceeded"


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance by the golden gamma and mix."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Frozen per-stream seed derivation: splitmix64(splitmix64(master) + index)."""
    return splitmix64((splitmix64(master & _M64) + index) & _M64)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & _M64))


@dataclass
class RunResult:
    """Outcome of one chain.

    status is "success" (point holds the final iterate), "failure"
    (the in-step exhausted its N attempts at iteration failed_at;
    y_at_failure is the out-step point that could not be re-entered),
    or "cap_exceeded" (ideal variant hit its practical cap).
    trials_per_iteration has one entry per executed iteration, the
    failing iteration included; total_trials is their sum and equals
    the number of membership-oracle calls made by in-steps.
    """

    status: str
    point: Optional[np.ndarray]
    failed_at: Optional[int]
    y_at_failure: Optional[np.ndarray]
    trials_per_iteration: list = field(default_factory=list)
    total_trials: int = 0
    seed: Optional[int] = None


def forward_step(x: np.ndarray, h: float, rng: np.random.Generator) -> np.ndarray:
    """The out-step: one Gaussian move of scale sqrt(h)."""
    if not (h > 0.0):
        raise ValueError(f"step size must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    return x + math.sqrt(h) * rng.standard_normal(x.shape[0])


def backward_step(y: np.ndarray, h: float, N: int, body: Body,
                  rng: np.random.Generator):
    """The in-step: rejection-sample N(y, h I) restricted to the body.

    Returns (point, attempts) on success and (None, N) when all N
    attempts landed outside.  Proposals are drawn and tested one at a
    time, so `attempts` equals the number of membership calls made.
    """
    if not (h > 0.0):
        raise ValueError(f"step size must be positive, got {h}")
    if N < 1:
        raise ValueError(f"attempt threshold must be >= 1, got {N}")
    y = np.asarray(y, dtype=float)
    sqrt_h = math.sqrt(h)
    for k in range(1, N + 1):
        x = y + sqrt_h * rng.standard_normal(y.shape[0])
        if body.membership(x):
            return x, k
    return None, N


def _run_chain(body: Body, x0, h: float, T: int, N: int,
               rng: np.random.Generator, cap_semantics: bool,
               seed: Optional[int]) -> RunResult:
    x = np.asarray(x0, dtype=float)
    if x.shape != (body.dim,):
        raise ValueError(f"start point has shape {x.shape}, body dimension is {body.dim}")
    if not bool(body.membership(x)):
        raise ValueError("start point is outside the body")
    if T < 0:
        raise ValueError(f"iteration count must be >= 0, got {T}")
    trials = []
    total = 0
    for i in range(T):
        y = forward_step(x, h, rng)
        xn, k = backward_step(y, h, N, body, rng)
        trials.append(k)
        total += k
        if xn is None:
            return RunResult(
                status=CAP_EXCEEDED if cap_semantics else FAILURE,
                point=None,
                failed_at=i,
                y_at_failure=y,
                trials_per_iteration=trials,
                total_trials=total,
                seed=seed,
            )
        x = xn
    return RunResult(
        status=SUCCESS,
        point=x,
        failed_at=None,
        y_at_failure=None,
        trials_per_iteration=trials,
        total_trials=total,
        seed=seed,
    )


def run_in_and_out(body: Body, x0, plan: Plan, seed: Optional[int] = None,
                   rng: Optional[np.random.Generator] = None) -> RunResult:
    """Run one chain for plan.T iterations with threshold plan.N.

    Exactly one of seed / rng must be given; a seed constructs the
    frozen Philox generator, an explicit generator continues its
    stream (used by ensembles after warm-start draws).
    """
    if (seed is None) == (rng is None):
        raise ValueError("pass exactly one of seed or rng")
    if rng is None:
        rng = make_rng(seed)
    return _run_chain(body, x0, plan.h, plan.T, plan.N, rng, False, seed)


def run_proximal_ideal(body: Body, x0, h: float, T: int,
                       seed: Optional[int] = None,
                       rng: Optional[np.random.Generator] = None,
                       attempt_cap: int = 10**9) -> RunResult:
    """The idealized chain: no failure threshold, only a practical cap.

    Identical trajectory to run_in_and_out for the same generator when
    no in-step ever exhausts the smaller of the two limits; hitting
    attempt_cap reports status "cap_exceeded".
    """
    if (seed is None) == (rng is None):
        raise ValueError("pass exactly one of seed or rng")
    if attempt_cap < 1:
        raise ValueError(f"attempt cap must be >= 1, got {attempt_cap}")
    if rng is None:
        rng = make_rng(seed)
    return _run_chain(body, x0, h, T, attempt_cap, rng, True, seed)


@dataclass
class EnsembleResult:
    results: list
    summary: dict


def run_ensemble(body: Body, warm_start: Callable[[np.random.Generator], np.ndarray],
                 plan: Plan, n_chains: int, seed: int) -> EnsembleResult:
    """Run n_chains independent chains from one master seed.

    Chain c uses the generator keyed by derive_seed(seed, c) for both
    its warm-start draw and the chain itself, so any subset of chains
    reproduces identically regardless of execution order.
    """
    if n_chains < 1:
        raise ValueError(f"need at least one chain, got {n_chains}")
    results = []
    for c in range(n_chains):
        chain_seed = derive_seed(seed, c)
        rng = make_rng(chain_seed)
        x0 = warm_start(rng)
        results.append(
            _run_chain(body, x0, plan.h, plan.T, plan.N, rng, False, chain_seed)
        )
    failures = sum(1 for r in results if r.status != SUCCESS)
    totals = [r.total_trials for r in results]
    summary = {
        "n_chains": n_chains,
        "failure_fraction": failures / n_chains,
        "mean_total_trials": math.fsum(totals) / n_chains,
        "max_total_trials": max(totals),
        "seed": seed,
    }
    return EnsembleResult(results=results, summary=summary)


def failure_rate_by_iteration(results) -> np.ndarray:
    """Conditional per-iteration failure rate across an ensemble.

    Entry i is (#chains failing at iteration i) / (#chains reaching
    iteration i).  Chains reach iteration i when they neither failed
    earlier nor stopped before it.
    """
    if not results:
        raise ValueError("no results")
    T = max(len(r.trials_per_iteration) for r in results)
    rates = np.zeros(T)
    for i in range(T):
        reached = sum(1 for r in results if len(r.trials_per_iteration) > i)
        failed = sum(1 for r in results if r.failed_at == i)
        rates[i] = failed / reached if reached else 0.0
    return rates
