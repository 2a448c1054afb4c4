"""Command-line front end.

Three subcommands share one JSON config format:

    inandout plan     --config cfg.json [--out plan.json]
    inandout sample   --config cfg.json --out outdir [--seed S] [--chains K]
                      [--plan plan.json]
    inandout diagnose --config cfg.json --out report.json [--seed S]
                      [--samples samples.jsonl]

Exit codes: 0 success / all bounds satisfied, 1 a bound or consistency
check failed, 2 invalid config, 3 I/O failure.

Floats in every emitted document are formatted with 17 significant
digits, which round-trips 64-bit values exactly and keeps reruns
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bodies, diagnostics, planner, sampler

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_IO = 3


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


# ---------------------------------------------------------------- JSON


def _render(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite float {x} in output document")
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_render(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    return _render(obj)


# ------------------------------------------------------------- config


def _require_keys(node: dict, allowed: set, required: set, where: str):
    if not isinstance(node, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(node) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(node)
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {sorted(missing)}")


_BODY_KINDS = {"ball", "box", "polytope", "union", "exclusion", "star"}


def build_body(node: dict, where: str = "body") -> bodies.Body:
    """Construct a Body from a config tree node (strict key checking)."""
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError(f"{where}: expected an object with a 'kind' key")
    kind = node["kind"]
    if kind not in _BODY_KINDS:
        raise ConfigError(f"{where}.kind: unknown kind {kind!r}")
    try:
        if kind == "ball":
            _require_keys(node, {"kind", "center", "radius"},
                          {"center", "radius"}, where)
            return bodies.make_ball(node["center"], node["radius"])
        if kind == "box":
            _require_keys(node, {"kind", "lo", "hi"}, {"lo", "hi"}, where)
            return bodies.make_box(node["lo"], node["hi"])
        if kind == "polytope":
            _require_keys(node, {"kind", "A", "b", "inner_center", "inner_radius"},
                          {"A", "b", "inner_center", "inner_radius"}, where)
            return bodies.make_halfspace_polytope(
                node["A"], node["b"], node["inner_center"], node["inner_radius"]
            )
        if kind == "union":
            _require_keys(node, {"kind", "parts", "volume"}, {"parts", "volume"}, where)
            parts = [build_body(p, f"{where}.parts[{i}]")
                     for i, p in enumerate(node["parts"])]
            return bodies.union(parts, node["volume"])
        if kind == "exclusion":
            _require_keys(node, {"kind", "outer", "hole", "volume"},
                          {"outer", "hole", "volume"}, where)
            return bodies.exclusion(
                build_body(node["outer"], f"{where}.outer"),
                build_body(node["hole"], f"{where}.hole"),
                node["volume"],
            )
        _require_keys(node, {"kind", "parts", "core_radius"},
                      {"parts", "core_radius"}, where)
        parts = [build_body(p, f"{where}.parts[{i}]")
                 for i, p in enumerate(node["parts"])]
        return bodies.star_shaped(parts, node["core_radius"])
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as e:
        raise ConfigError(f"{where}: {e}") from e


@dataclass
class RunConfig:
    """Parsed and validated configuration document."""

    raw: dict
    body_node: Optional[dict]
    plan_node: Optional[dict]
    run_node: dict
    diagnose_node: dict
    mode: Optional[str]

    def to_dict(self) -> dict:
        return self.raw


def parse_config(doc: dict) -> RunConfig:
    _require_keys(doc, {"body", "plan", "run", "diagnose", "mode"}, set(), "config")
    mode = doc.get("mode")
    if mode is not None and mode not in ("plan", "sample", "diagnose"):
        raise ConfigError(f"config.mode: must be plan/sample/diagnose, got {mode!r}")
    plan_node = doc.get("plan")
    if plan_node is not None:
        _require_keys(plan_node, {"q", "eps", "M", "C_PI", "alpha", "beta", "n"},
                      {"q", "eps", "M", "C_PI"}, "config.plan")
    run_node = doc.get("run", {})
    _require_keys(run_node, {"n_chains", "seed", "t_cap", "n_cap"}, set(), "config.run")
    diag_node = doc.get("diagnose", {})
    _require_keys(
        diag_node,
        {"seed", "n_mc", "inner_mc", "resolution", "n_cells", "r_grid", "t_grid",
         "h_override"},
        set(),
        "config.diagnose",
    )
    return RunConfig(
        raw=doc,
        body_node=doc.get("body"),
        plan_node=plan_node,
        run_node=run_node,
        diagnose_node=diag_node,
        mode=mode,
    )


def resolve_plan_inputs(cfg: RunConfig) -> tuple:
    """Build (PlanInputs, Body-or-None) from the config, resolving 'auto'."""
    if cfg.plan_node is None:
        raise ConfigError("config.plan: required for this command")
    node = dict(cfg.plan_node)
    body = build_body(cfg.body_node) if cfg.body_node is not None else None

    def resolved(key):
        val = node.get(key, "auto")
        if val == "auto":
            if body is None or body.growth is None:
                raise ConfigError(
                    f"config.plan.{key}: 'auto' needs a body with a growth certificate"
                )
            return getattr(body.growth, key)
        return val

    alpha = resolved("alpha")
    beta = resolved("beta")
    n = node.get("n", "auto")
    if n == "auto":
        if body is None:
            raise ConfigError("config.plan.n: 'auto' needs a body")
        n = body.dim
    try:
        inputs = planner.PlanInputs(
            q=node["q"], eps=node["eps"], M=node["M"], C_PI=node["C_PI"],
            alpha=alpha, beta=beta, n=int(n),
        )
    except ValueError as e:
        raise ConfigError(f"config.plan: {e}") from e
    return inputs, body


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise OSError(f"cannot read {what} {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what} {path} is not valid JSON: {e}") from e


# ------------------------------------------------------------ commands


def plan_document(inputs: planner.PlanInputs, p: planner.Plan,
                  report) -> dict:
    return {
        "inputs": inputs.to_dict(),
        "plan": p.to_dict(),
        "consistency": {"ok": report.ok, "violations": list(report.violations)},
    }


def cmd_plan(cfg: RunConfig, out_path: Optional[str]) -> int:
    inputs, _ = resolve_plan_inputs(cfg)
    try:
        p = planner.plan(inputs)
    except planner.PlanOverflowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    report = planner.check_plan_consistency(p, inputs)
    doc = dumps_canonical(plan_document(inputs, p, report))
    if out_path:
        Path(out_path).write_text(doc + "\n", encoding="utf-8")
    print(doc)
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


def cmd_sample(cfg: RunConfig, out_dir: str, seed_override: Optional[int],
               chains_override: Optional[int],
               plan_path: Optional[str]) -> int:
    if plan_path is not None:
        doc = _load_json(plan_path, "plan document")
        try:
            inputs = planner.PlanInputs.from_dict(doc["inputs"])
            p = planner.Plan.from_dict(doc["plan"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"plan document {plan_path}: {e}") from e
        if cfg.body_node is None:
            raise ConfigError("config.body: required to sample")
        body = build_body(cfg.body_node)
    else:
        inputs, body = resolve_plan_inputs(cfg)
        if body is None:
            raise ConfigError("config.body: required to sample")
        p = planner.plan(inputs)

    run = cfg.run_node
    n_chains = chains_override if chains_override is not None else run.get("n_chains", 1)
    seed = seed_override if seed_override is not None else run.get("seed", 0)
    if not isinstance(n_chains, int) or n_chains < 1:
        raise ConfigError(f"config.run.n_chains: need a positive integer, got {n_chains!r}")
    if not isinstance(seed, int):
        raise ConfigError(f"config.run.seed: need an integer, got {seed!r}")
    t_cap = run.get("t_cap")
    n_cap = run.get("n_cap")
    import dataclasses as _dc
    if t_cap is not None:
        if not isinstance(t_cap, int) or t_cap < 1:
            raise ConfigError(f"config.run.t_cap: need a positive integer, got {t_cap!r}")
        p = _dc.replace(p, T=min(p.T, t_cap))
    if n_cap is not None:
        if not isinstance(n_cap, int) or n_cap < 1:
            raise ConfigError(f"config.run.n_cap: need a positive integer, got {n_cap!r}")
        p = _dc.replace(p, N=min(p.N, n_cap))

    t0 = time.monotonic()
    ens = sampler.run_ensemble(
        body, lambda rng: bodies.sample_uniform(body, rng), p, n_chains, seed
    )
    wall = time.monotonic() - t0

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "samples.jsonl", "w", encoding="utf-8") as f:
            for c, res in enumerate(ens.results):
                rec = {
                    "chain": c,
                    "outcome": res.status,
                    "x": None if res.point is None else list(res.point),
                    "total_trials": res.total_trials,
                    "failed_at": res.failed_at,
                }
                f.write(dumps_canonical(rec) + "\n")
        summary = {
            "n_chains": ens.summary["n_chains"],
            "failure_fraction": ens.summary["failure_fraction"],
            "mean_total_trials": ens.summary["mean_total_trials"],
            "max_total_trials": ens.summary["max_total_trials"],
            "plan": p.to_dict(),
            "seed": seed,
            "all_failed": ens.summary["failure_fraction"] == 1.0,
            "wall_time_s": wall,
        }
        (out / "summary.json").write_text(
            dumps_canonical(summary) + "\n", encoding="utf-8"
        )
    except OSError as e:
        raise OSError(f"cannot write outputs under {out_dir}: {e}") from e
    print(dumps_canonical({"out": str(out), **{k: summary[k] for k in
                                               ("n_chains", "failure_fraction",
                                                "all_failed")}}))
    return EXIT_OK


def _diagnose_checks(body: bodies.Body, p: planner.Plan, diag: dict,
                     samples: Optional[np.ndarray]) -> tuple:
    """Run every applicable check; returns (records, any_violation)."""
    seed = diag.get("seed", 0)
    n_mc = diag.get("n_mc", 20_000)
    inner_mc = diag.get("inner_mc", 2_000)
    resolution = diag.get("resolution", 400)
    n_cells = diag.get("n_cells", 16)
    r_grid = diag.get("r_grid", [0.25, 0.5, 1.0])
    t_grid = diag.get("t_grid", [0.1, 0.5, 1.0])

    oracle = None
    if body.dim == 2:
        oracle = diagnostics.GridOracle(body, resolution)

    records = []
    violated = False

    def run(name, fn):
        nonlocal violated
        try:
            check = fn()
        except diagnostics.UnsupportedCheck as e:
            records.append({"name": name, "status": "skipped", "reason": str(e)})
            return
        except ValueError as e:
            records.append(
                {"name": name, "status": "hypothesis_violation", "reason": str(e)}
            )
            violated = True
            return
        rec = check.to_dict()
        rec["status"] = "ran"
        records.append(rec)
        if check.verdict != diagnostics.SATISFIED:
            violated = True

    for i, r in enumerate(r_grid):
        rng = sampler.make_rng(sampler.derive_seed(seed, 100 + i))
        run(f"stationary_escape(r={r})",
            lambda r=r, rng=rng: diagnostics.stationary_escape_check(
                body, p.h, r, n_mc, rng, oracle=oracle))
    rng_f = sampler.make_rng(sampler.derive_seed(seed, 200))
    run("stationary_failure",
        lambda: diagnostics.stationary_failure_check(body, p, min(n_mc, 4000), rng_f,
                                                     inner_mc=inner_mc))
    rng_t = sampler.make_rng(sampler.derive_seed(seed, 300))
    run("expected_trials",
        lambda: diagnostics.expected_trials_check(body, p, min(n_mc, 4000), rng_t,
                                                  inner_mc=inner_mc))
    for i, t in enumerate(t_grid):
        rng = sampler.make_rng(sampler.derive_seed(seed, 400 + i))
        run(f"certificate_soundness(t={t})",
            lambda t=t, rng=rng: diagnostics.certificate_soundness_check(
                body, t, n_mc, rng, oracle=oracle))

    if body.dim != 2:
        records.append({"name": "grid_tv", "status": "skipped",
                        "reason": "grid oracle is 2-D only"})
    else:
        rng = sampler.make_rng(sampler.derive_seed(seed, 500))
        if samples is None:
            pts = bodies.sample_uniform(body, rng, max(n_mc, 5 * n_cells))
            src = "exact-uniform reference (bbox rejection)"
        else:
            pts = samples
            src = "supplied sample file"
        try:
            tv = diagnostics.grid_tv_check(body, pts, n_cells, oracle=oracle)
            ok = tv.p_value >= 0.01
            records.append({
                "name": "grid_tv",
                "status": "ran",
                "tv_estimate": tv.tv_estimate,
                "chi2_statistic": tv.chi2_statistic,
                "p_value": tv.p_value,
                "n_cells": tv.n_cells,
                "n_samples": tv.n_samples,
                "verdict": diagnostics.SATISFIED if ok else diagnostics.VIOLATED,
                "note": f"samples: {src}",
            })
            if not ok:
                violated = True
        except ValueError as e:
            records.append({"name": "grid_tv", "status": "hypothesis_violation",
                            "reason": str(e)})
            violated = True
    return records, violated


def cmd_diagnose(cfg: RunConfig, out_path: str, seed_override: Optional[int],
                 samples_path: Optional[str]) -> int:
    inputs, body = resolve_plan_inputs(cfg)
    if body is None:
        raise ConfigError("config.body: required to diagnose")
    p = planner.plan(inputs)
    diag = dict(cfg.diagnose_node)
    if seed_override is not None:
        diag["seed"] = seed_override
    h_override = diag.pop("h_override", None)
    if h_override is not None:
        import dataclasses as _dc
        if not (isinstance(h_override, (int, float)) and h_override > 0):
            raise ConfigError(f"config.diagnose.h_override: need a positive number")
        p = _dc.replace(p, h=float(h_override))

    samples = None
    if samples_path is not None:
        pts = []
        try:
            with open(samples_path, "r", encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    if rec.get("outcome") == "success" and rec.get("x") is not None:
                        pts.append(rec["x"])
        except OSError as e:
            raise OSError(f"cannot read samples {samples_path}: {e}") from e
        if not pts:
            raise ConfigError(f"samples file {samples_path} holds no successful chains")
        samples = np.asarray(pts, dtype=float)

    records, violated = _diagnose_checks(body, p, diag, samples)
    report = {
        "checks": records,
        "environment": {
            "seed": diag.get("seed", 0),
            "n_mc": diag.get("n_mc", 20_000),
            "inner_mc": diag.get("inner_mc", 2_000),
            "resolution": diag.get("resolution", 400),
            "h": p.h,
        },
    }
    doc = dumps_canonical(report)
    try:
        Path(out_path).write_text(doc + "\n", encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write report {out_path}: {e}") from e
    print(doc)
    return EXIT_CHECK_FAILED if violated else EXIT_OK


# --------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="inandout",
                                 description="In-and-Out uniform sampler toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="compute and check a run schedule")
    p_plan.add_argument("--config", required=True)
    p_plan.add_argument("--out")

    p_sample = sub.add_parser("sample", help="run an ensemble of chains")
    p_sample.add_argument("--config", required=True)
    p_sample.add_argument("--out", required=True)
    p_sample.add_argument("--seed", type=int)
    p_sample.add_argument("--chains", type=int)
    p_sample.add_argument("--plan", dest="plan_file")

    p_diag = sub.add_parser("diagnose", help="run the bound-check suite")
    p_diag.add_argument("--config", required=True)
    p_diag.add_argument("--out", required=True)
    p_diag.add_argument("--seed", type=int)
    p_diag.add_argument("--samples")

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(_load_json(args.config, "config"))
        if args.command == "plan":
            return cmd_plan(cfg, args.out)
        if args.command == "sample":
            return cmd_sample(cfg, args.out, args.seed, args.chains, args.plan_file)
        return cmd_diagnose(cfg, args.out, args.seed, args.samples)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except planner.PlanOverflowError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


def entrypoint():  # pragma: no cover - thin wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entrypoint()
