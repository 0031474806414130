"""Running configured experiments and comparing methods."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError
from ..oracle import make_problem, reference_solution
from ..outer import (RunTrace, SolverParams, near_optimal_tensor_method, optimal_tensor_method,
                     plain_tensor_method)
from .config import ExperimentConfig
from .slopes import fit_slope
from .traceio import write_metadata, write_trace_csv

OUTPUT_ENV = "OPTENSOR_OUTPUT_DIR"
#: default M / L for the bisection baseline, which needs M > L strictly
NEAR_OPTIMAL_M_FACTOR = 1.1
M_FLOOR = 1e-8


def output_dir(config: ExperimentConfig) -> Path:
    """``config.out``, relocated under ``$OPTENSOR_OUTPUT_DIR`` when that is set."""
    base = os.environ.get(OUTPUT_ENV)
    out = Path(config.out)
    return Path(base) / out.name if base else out


def _initial_point(config: ExperimentConfig, dim: int) -> np.ndarray:
    x0 = config.params.get("x0", "zeros")
    if isinstance(x0, list):
        return np.asarray(x0, dtype=float)
    if x0 == "random":
        return np.random.default_rng(config.seed).standard_normal(dim)
    return np.zeros(dim)


@dataclass
class RunResult:
    config: ExperimentConfig
    trace: RunTrace
    metadata: dict = field(default_factory=dict)
    csv_path: Optional[Path] = None
    meta_path: Optional[Path] = None


def execute(config: ExperimentConfig) -> RunResult:
    """Build the problem, resolve defaults, run the method. Writes nothing."""
    problem = make_problem(config.problem)
    x0 = _initial_point(config, problem.dim)
    x_star, f_star = reference_solution(problem, tol=config.reference_tol)
    prm = config.params

    L = prm.get("L")
    lip_source = "config"
    if L is None:
        L = problem.lipschitz_bound()
        lip_source = getattr(problem, "lipschitz_source", "analytic")
    R = prm.get("R")
    r_source = "config"
    if R is None:
        R = float(np.linalg.norm(x0 - x_star))
        r_source = "reference_solution"
    M = prm.get("M")
    if M is None:
        M = max(L, M_FLOOR)
        if config.method == "near_optimal":
            M *= NEAR_OPTIMAL_M_FACTOR
    if config.method == "otm" and prm.get("eta") is None and not R > 0:
        raise ConfigError("x0 coincides with the minimizer, so R = 0 and the optimal eta is "
                          "undefined; set 'params.eta' explicitly")

    params = SolverParams(M=float(M), L=float(L), R=float(R), keep_iterates=False)
    for key in ("sigma", "eta", "K", "subsolver_tol", "grad_floor_rtol", "inner_max_iter",
                "lambda0", "bisection_max_steps"):
        if prm.get(key) is not None:
            setattr(params, key, prm[key])
    params.validate(config.method)

    if config.method == "otm":
        trace = optimal_tensor_method(problem, x0, params, f_star)
    elif config.method == "near_optimal":
        trace = near_optimal_tensor_method(problem, x0, params, f_star)
    else:
        trace = plain_tensor_method(problem, x0, params.M, params.K, f_star, params.subsolver_tol)

    meta = {
        "config": config.to_dict(),
        "method": config.method,
        "seed": config.seed,
        "problem": config.problem.to_dict(),
        "params": asdict(params),
        "R": float(R),
        "R_source": r_source,
        "L": float(L),
        "lipschitz_source": lip_source,
        "f_star": f_star,
        "reference_tol": config.reference_tol,
        "oracle_calls": trace.metadata.get("oracle_calls"),
        "eta": trace.metadata.get("eta"),
        "calls_to_reach": {format(e, "g"): trace.calls_to_reach(e) for e in config.targets},
        "calls_to_reach_paper_accounting": {
            format(e, "g"): trace.calls_to_reach(e, paper_accounting=True) for e in config.targets},
    }
    return RunResult(config, trace, meta)


def run(config: ExperimentConfig) -> RunResult:
    """Execute and write ``trace.csv`` and ``metadata.json`` into the output directory."""
    result = execute(config)
    out = output_dir(config)
    result.csv_path = write_trace_csv(result.trace, out / "trace.csv")
    result.meta_path = write_metadata(result.metadata, out / "metadata.json")
    return result


def _summary_row(result: RunResult) -> dict:
    cfg, trace = result.config, result.trace
    lo, hi = cfg.fit_range
    floor = 10.0 * cfg.reference_tol
    try:
        fit = asdict(fit_slope(trace, lo, hi, floor))
    except ValueError as exc:
        fit = {"error": str(exc)}
    row = {
        "method": cfg.method,
        "K": trace.K,
        "oracle_calls": result.metadata["oracle_calls"],
        "calls_to_reach": result.metadata["calls_to_reach"],
        "calls_to_reach_paper_accounting": result.metadata["calls_to_reach_paper_accounting"],
        "final_gap": float(trace.gaps[-1]) if trace.K else math.nan,
        "slope": fit,
    }
    if trace.T:
        row["avg_inner_iterations"] = float(np.sum(trace.T)) / trace.K
    if trace.bisection_steps:
        row["avg_bisection_steps"] = float(np.mean(trace.bisection_steps))
    return row


def compare(configs: list, jobs: int = 1, out: Optional[Path] = None) -> dict:
    """Run several methods on one problem and tabulate their cost to each target."""
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    ref = configs[0].problem.to_dict()
    for cfg in configs[1:]:
        if cfg.problem.to_dict() != ref:
            raise ConfigError(f"{cfg.source or 'config'}: problem {cfg.problem.to_dict()} differs "
                              f"from {ref}")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(execute, configs))
    else:
        results = [execute(cfg) for cfg in configs]
    targets = sorted({e for cfg in configs for e in cfg.targets}, reverse=True)
    summary = {"problem": ref, "targets": targets, "f_star": results[0].metadata["f_star"],
               "R": results[0].metadata["R"], "methods": [_summary_row(r) for r in results]}
    if out is not None:
        write_metadata(summary, Path(out))
    return summary


def format_summary(summary: dict) -> str:
    """Plain-text table: one row per method, one column per target."""
    targets = [format(e, "g") for e in summary["targets"]]
    head = ["method", "K"] + [f"calls@{t}" for t in targets] + ["slope", "avg T", "avg bisect"]
    rows = [head]
    for m in summary["methods"]:
        calls = [m["calls_to_reach"].get(t) for t in targets]
        slope = m["slope"].get("slope")
        rows.append([m["method"], str(m["K"])] + ["-" if c is None else str(c) for c in calls]
                    + ["-" if slope is None else f"{slope:.3f}",
                       f"{m['avg_inner_iterations']:.3f}" if "avg_inner_iterations" in m else "-",
                       f"{m['avg_bisection_steps']:.3f}" if "avg_bisection_steps" in m else "-"])
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows)
