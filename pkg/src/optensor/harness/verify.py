"""Bound-verification suites.

Each suite evaluates a family of inequalities on seeded instances and records
both sides of every check. Failures are reported, never raised.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..model import AuxFunction, aux_taylor
from ..oracle import CountedOracle, ProblemSpec, make_problem, reference_solution
from ..outer import (SolverParams, inner_minimizers, ms_condition_residuals,
                     near_optimal_tensor_method, optimal_tensor_method, potential_check)
from ..schedule import c_p, oracle_complexity_bound, schedule, schedule_bounds
from ..subsolver import CubicModel, solve_cubic, verify_step

SUITES = ("schedule", "subsolver", "inner", "potential", "oracle_bound")
REFERENCE_TOL = 1e-12
#: additive allowance for the error in f*, per the reference tolerance
F_FLOOR = 10 * REFERENCE_TOL


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool
    relation: str = "<="

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.lhs:.6g} {self.relation} {self.rhs:.6g}"


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, lhs, rhs, relation="<=", slack=0.0):
        lhs, rhs = float(lhs), float(rhs)
        ok = lhs <= rhs + slack if relation == "<=" else lhs >= rhs - slack
        self.checks.append(Check(name, lhs, rhs, bool(ok), relation))

    def summary(self) -> str:
        n_fail = sum(not c.passed for c in self.checks)
        status = "PASS" if self.passed else "FAIL"
        return f"{self.suite}: {status} ({len(self.checks) - n_fail}/{len(self.checks)} checks, {self.elapsed:.1f}s)"


def verify_schedule(k_max: int = 10_000, rel: float = 1e-12) -> SuiteReport:
    """Envelope bounds on beta_k and lambda_k, plus the schedule identities."""
    rep = SuiteReport("schedule")
    for p in (2, 3, 4):
        for eta in (0.1, 1.0, 10.0):
            worst_beta = worst_lam = worst_id = -math.inf
            beta_pair = lam_pair = (0.0, 0.0)
            for st in schedule(p, eta):
                lo, hi = schedule_bounds(p, eta, st.k)
                # margins relative to the bound: beta must exceed lo, lambda stay below hi
                mb = (lo - st.beta_k) / lo
                ml = (st.lambda_k - hi) / hi
                if mb > worst_beta:
                    worst_beta, beta_pair = mb, (st.beta_k, lo)
                if ml > worst_lam:
                    worst_lam, lam_pair = ml, (st.lambda_k, hi)
                ident = max(abs(st.lambda_k * st.beta_k - st.eta_k**2) / st.eta_k**2,
                            abs(st.alpha_k * st.beta_k - st.eta_k) / st.eta_k)
                worst_id = max(worst_id, ident)
                if st.k >= k_max:
                    break
            tag = f"p={p} eta={eta:g} k<={k_max}"
            rep.add(f"beta_k lower bound, tightest k ({tag})", beta_pair[0], beta_pair[1] * (1 - rel), ">=")
            rep.add(f"lambda_k upper bound, tightest k ({tag})", lam_pair[0], lam_pair[1] * (1 + rel))
            rep.add(f"lambda*beta = eta^2 and alpha*beta = eta, max rel error ({tag})", worst_id, 1e-13)
    return rep


def random_cubic_model(rng, d: int) -> CubicModel:
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eig = 10.0 ** rng.uniform(-3, 2, d)
    g = rng.standard_normal(d) * 10.0 ** rng.uniform(-4, 2)
    return CubicModel(g, (Q * eig) @ Q.T, 10.0 ** rng.uniform(-2, 2))


def verify_subsolver(n_models: int = 200, n_centers: int = 100, seed: int = 0) -> SuiteReport:
    """Cubic subproblem exactness and the one-step gradient bound of the cubic step."""
    rep = SuiteReport("subsolver")
    rng = np.random.default_rng(seed)
    for i in range(n_models):
        d = int(rng.integers(1, 101))
        model = random_cubic_model(rng, d)
        res = solve_cubic(model)
        resid = np.linalg.norm(model.gradient(res.step))
        rep.add(f"model {i} (d={d}) stationarity residual", resid,
                1e-10 * max(1.0, np.linalg.norm(model.g)))
        rep.add(f"model {i} (d={d}) lambda_min(H) + M r", res.certificate(model.M), 0.0, ">=")

    problem = make_problem(ProblemSpec("logistic", 20, 1, {"n_samples": 100}))
    L = problem.lipschitz_bound()
    M = 1.1 * L
    oracle = CountedOracle(problem)
    for i in range(n_centers):
        z = rng.standard_normal(20) * 10.0 ** rng.uniform(-1, 1)
        lam = 10.0 ** rng.uniform(-1, 3)
        aux = AuxFunction(oracle, lam, z + rng.standard_normal(20) * 0.1)
        model = aux_taylor(aux, z)
        step = solve_cubic(CubicModel(model.gradient, model.hessian, M)).step
        ratio = verify_step(_RawAux(problem, aux), z, step, M, L)
        rep.add(f"logistic center {i}: ||grad A(x+)|| / ((2M+L)/2 ||d||^2)", ratio, 1.0 + 1e-6)
    return rep


class _RawAux:
    """Uncounted view of A(.; z) on the raw problem, for independent re-evaluation."""

    def __init__(self, problem, aux: AuxFunction):
        self.problem, self.lam, self.anchor = problem, aux.lam, aux.anchor

    def gradient(self, x):
        return self.problem.gradient(x) + (x - self.anchor) / self.lam


def verify_inner(n_instances: int = 50, K: int = 10, seed: int = 0) -> SuiteReport:
    """Iteration bound and per-step contraction of the inner loop on quadratics.

    For a quadratic L = 0, so any M > 0 is admissible; eta = 1 gives steps large
    enough that the inner loop runs several iterations.
    """
    rep = SuiteReport("inner")
    M, sigma, L = 1.0, 0.5, 0.0
    C = c_p(2, M, L, sigma)
    shrink = 1.0 - (L / (2 * M)) ** 2
    for d in (5, 20):
        for inst in range(n_instances):
            problem = make_problem(ProblemSpec("quadratic", d, seed + inst, {"mu": 0.1}))
            x_star = problem.minimizer()
            x0 = np.random.default_rng(seed + inst).standard_normal(d)
            trace = optimal_tensor_method(problem, x0, SolverParams(M=M, L=L, sigma=sigma, K=K, eta=1.0),
                                          problem.value(x_star))
            worst_T, worst_c = (0, 1.0, -math.inf), (0.0, 0.0, -math.inf)
            for rec, xg, inner in zip(trace.records, trace.x_g, trace.inner):
                xs = problem.prox_minimizer(rec.lambda_k, xg)
                dist = float(np.linalg.norm(xg - xs))
                bound = math.ceil(rec.lambda_k * C * dist) + 1
                if inner.T - bound > worst_T[2]:
                    worst_T = (inner.T, bound, inner.T - bound)
                for t, half in enumerate(inner.halves):
                    before = float(np.sum((inner.iterates[t] - xs) ** 2))
                    after = float(np.sum((inner.iterates[t + 1] - xs) ** 2))
                    rhs = before - shrink * float(np.sum((inner.iterates[t] - half) ** 2))
                    excess = (after - rhs) / max(before, 1e-300)
                    if excess > worst_c[2]:
                        worst_c = (after, rhs + 1e-8 * before, excess)
            tag = f"quadratic d={d} seed={seed + inst}"
            rep.add(f"{tag}: T^k vs ceil(lam C dist) + 1, worst k", worst_T[0], worst_T[1])
            rep.add(f"{tag}: contraction ||x^(t+1)-x*||^2 vs rhs + 1e-8 slack, worst t",
                    worst_c[0], worst_c[1])
    return rep


def verify_potential(K: int = 200) -> SuiteReport:
    """Potential inequalities, the inexactness condition, and inner-iteration budgets."""
    rep = SuiteReport("potential")
    # quadratics have L = 0, so any M > 0 is admissible; M = 1 keeps eta moderate
    problem = make_problem(ProblemSpec("quadratic", 10, 0, {"mu": 0.1}))
    x_star = problem.minimizer()
    f_star = problem.value(x_star)
    R = float(np.linalg.norm(x_star))
    params = SolverParams(M=1.0, L=0.0, R=R, sigma=0.5, K=K)
    trace = optimal_tensor_method(problem, np.zeros(10), params, f_star)
    report = potential_check(trace, inner_minimizers(problem, trace), R, 0.5, f_star, F_FLOOR)
    i_w = int(np.argmax(report.weak_lhs - report.slack))
    i_s = int(np.argmax(report.strong_lhs - report.slack))
    rep.add(f"weak potential (1 - sigma^2 form), tightest prefix K={i_w + 1}",
            report.weak_lhs[i_w], report.rhs + report.slack[i_w])
    rep.add(f"strong potential ((1-sigma)/(1+sigma) form), tightest prefix K={i_s + 1}",
            report.strong_lhs[i_s], report.rhs + report.slack[i_s])
    _ms_checks(rep, problem, trace, "otm quadratic d=10")

    for spec in (ProblemSpec("quadratic", 10, 0, {"mu": 0.1}), ProblemSpec("power", 10, 0),
                 ProblemSpec("logistic", 20, 1, {"n_samples": 100})):
        problem = make_problem(spec)
        x_star, f_star = reference_solution(problem, tol=REFERENCE_TOL)
        L = problem.lipschitz_bound()
        M = L if L > 0 else 1.0
        R = float(np.linalg.norm(x_star))
        params = SolverParams(M=M, L=L, R=R, sigma=0.5, K=K, keep_iterates=False)
        trace = optimal_tensor_method(problem, np.zeros(problem.dim), params, f_star)
        total = int(np.sum(trace.T))
        rep.add(f"{spec.kind}: sum of T^k with optimal eta vs 2K + 1 (K={K})", total, 2 * K + 1)
        if spec.kind == "logistic":
            _ms_checks(rep, problem, trace, "otm logistic d=20")
    return rep


def _ms_checks(rep: SuiteReport, problem, trace, tag: str, rel: float = 1e-10):
    triples = ms_condition_residuals(problem, trace)
    worst = max(triples, key=lambda t: t[0] - t[1] * (1 + rel) - t[2])
    n_floor = sum(lhs > rhs * (1 + rel) for lhs, rhs, _ in triples)
    rep.add(f"{tag}: inexact prox condition + rounding floor, worst k "
            f"({n_floor} of {len(triples)} accepted at the floor)",
            worst[0], worst[1] * (1 + rel) + worst[2])


def verify_oracle_bound(targets=(1e-2, 1e-4, 1e-6, 1e-8), K_max: int = 500) -> SuiteReport:
    """Total oracle-call bound on the power problem and the bisection baseline interval."""
    rep = SuiteReport("oracle_bound")
    problem = make_problem(ProblemSpec("power", 10, 0))
    x_star, f_star = reference_solution(problem)
    L = problem.lipschitz_bound()
    R = float(np.linalg.norm(x_star))
    params = SolverParams(M=L, L=L, R=R, sigma=0.5, K=K_max, keep_iterates=False)
    trace = optimal_tensor_method(problem, np.zeros(10), params, f_star)
    for eps in targets:
        calls = trace.calls_to_reach(eps + F_FLOOR, paper_accounting=True)
        bound = oracle_complexity_bound(2, L, R, eps)
        rep.add(f"power d=10: 1+2T accounted calls to gap <= {eps:g}",
                math.inf if calls is None else calls, bound)

    problem = make_problem(ProblemSpec("logistic", 20, 1, {"n_samples": 100}))
    x_star, f_star = reference_solution(problem, tol=REFERENCE_TOL)
    L = problem.lipschitz_bound()
    M = 1.1 * L
    trace = near_optimal_tensor_method(
        problem, np.zeros(20), SolverParams(M=M, L=L, sigma=0.5, K=200, keep_iterates=False), f_star)
    lo, hi, worst = search_interval_margins(trace, M, L, 0.5)
    rep.add("near_optimal logistic: accepted lambda_k ||x_f - x_g||, lowest", lo[0], lo[1], ">=")
    rep.add("near_optimal logistic: accepted lambda_k ||x_f - x_g||, highest", hi[0], hi[1])
    _ms_checks(rep, problem, trace, "near_optimal logistic d=20")
    return rep


def search_interval_margins(trace, M: float, L: float, sigma: float, rel: float = 1e-10):
    """Extremes of lambda ||x_f - x_g|| over accepted steps against the p = 2 search interval.

    Recomputed from the stored iterates, not from the solver's own test.
    """
    lo_c = sigma / (2 * M + L)
    hi_c = 2 * sigma / (2 * M + L)
    q = np.array([r.lambda_k * np.linalg.norm(xf - xg)
                  for r, xf, xg in zip(trace.records, trace.x_f[1:], trace.x_g)])
    return (float(q.min()), lo_c * (1 - rel)), (float(q.max()), hi_c * (1 + rel)), q


SUITE_FUNCS = {
    "schedule": verify_schedule,
    "subsolver": verify_subsolver,
    "inner": verify_inner,
    "potential": verify_potential,
    "oracle_bound": verify_oracle_bound,
}


def run_suites(name: str) -> list:
    if name != "all" and name not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {name!r}; expected one of {list(SUITES) + ['all']}")
    names = SUITES if name == "all" else (name,)
    reports = []
    for n in names:
        t0 = time.perf_counter()
        rep = SUITE_FUNCS[n]()
        rep.elapsed = time.perf_counter() - t0
        reports.append(rep)
    return reports
