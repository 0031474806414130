"""Outer methods: the optimal tensor method, the bisection-based near-optimal
baseline, the plain cubic-regularized Newton method, and potential checks.

All three methods share :class:`RunTrace`. Row ``k`` of a trace (1-based)
describes the outer iteration that produced the k-th iterate; its ``gap`` is
the suboptimality of that iterate. Gaps are computed on the raw problem and
never touch the oracle counter.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import BisectionError, ConfigError, SolverError
from .inner import tensor_extragradient, theoretical_T_bound
from .model import AuxFunction, aux_minimizer
from .oracle import CountedOracle, Problem, as_point
from .schedule import optimal_eta, schedule
from .subsolver import CubicModel, solve_cubic

METHODS = ("otm", "near_optimal", "plain_tensor")


@dataclass
class SolverParams:
    M: float
    sigma: float = 0.5
    K: int = 100
    p: int = 2
    #: OTM step parameter; None means the optimal value computed from R
    eta: Optional[float] = None
    #: known bound on the Hessian Lipschitz constant (None: use M)
    L: Optional[float] = None
    #: distance ||x0 - x*||, needed for the optimal eta and inner iteration caps
    R: Optional[float] = None
    subsolver_tol: float = 1e-12
    grad_floor_rtol: float = 1e-12
    inner_max_iter: Optional[int] = None
    lambda0: float = 1.0
    bisection_max_steps: int = 100
    keep_iterates: bool = True

    def validate(self, method: str = "otm"):
        if self.p != 2:
            raise ConfigError(f"only p=2 methods are runnable, got p={self.p}")
        if not self.M > 0:
            raise ConfigError(f"M must be positive, got {self.M}")
        if method != "plain_tensor" and not 0 < self.sigma < 1:
            raise ConfigError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.L is not None and self.M < self.L:
            raise ConfigError(f"M={self.M} is below the Lipschitz bound L={self.L}")
        if int(self.K) < 1:
            raise ConfigError("K must be at least 1")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError("eta must be positive")
        if self.R is not None and self.R < 0:
            raise ConfigError("R must be nonnegative")

    @property
    def L_eff(self) -> float:
        return self.M if self.L is None else self.L


@dataclass
class IterationRecord:
    k: int
    gap: float
    oracle_calls_cum: int
    oracle_calls_paper_accounting_cum: int
    T_k: int
    lambda_k: float
    beta_k: float
    alpha_k: float
    eta_k: float
    step_dist: float
    inner_residual_lhs: float
    inner_residual_rhs: float
    value: float = math.nan


CSV_COLUMNS = ("k", "gap", "oracle_calls_cum", "oracle_calls_paper_accounting_cum", "T_k",
               "lambda_k", "beta_k", "alpha_k", "eta_k", "step_dist", "inner_residual_lhs",
               "inner_residual_rhs")


@dataclass
class RunTrace:
    method: str
    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    #: x_f^0 .. x_f^K (for plain_tensor: the iterates x^0 .. x^K)
    x_f: list = field(default_factory=list)
    #: x_g^0 .. x_g^{K-1}; empty for plain_tensor
    x_g: list = field(default_factory=list)
    x: list = field(default_factory=list)
    inner: list = field(default_factory=list)
    #: trial counts of the lambda search (near_optimal only)
    bisection_steps: list = field(default_factory=list)
    #: sum of inner iterations per outer iteration (otm only)
    T: list = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def gaps(self) -> np.ndarray:
        return self.column("gap")

    def calls_to_reach(self, eps: float, paper_accounting: bool = False) -> Optional[int]:
        """Cumulative oracle calls when the gap first drops to ``eps`` (None if never)."""
        key = "oracle_calls_paper_accounting_cum" if paper_accounting else "oracle_calls_cum"
        for r in self.records:
            if r.gap <= eps:
                return getattr(r, key)
        return None

    def rows(self) -> list[dict[str, Any]]:
        return [{c: asdict(r)[c] for c in CSV_COLUMNS} for r in self.records]


def _prepare(problem: Problem, x0, params: SolverParams, method: str):
    params.validate(method)
    x0 = as_point(x0, problem.dim)
    return CountedOracle(problem), x0.copy()


def _gap(value, f_star):
    return value - f_star if f_star is not None else math.nan


def _metadata(problem, params, f_star, x0):
    return {"problem_kind": problem.kind, "dim": problem.dim, "params": asdict(params),
            "f_star": f_star, "x0_norm": float(np.linalg.norm(x0))}


def optimal_tensor_method(problem: Problem, x0, params: SolverParams,
                          f_star: Optional[float] = None) -> RunTrace:
    """Optimal tensor method for p = 2 with the predetermined schedule.

    Each outer iteration: schedule step, x_g = alpha x + (1 - alpha) x_f,
    tensor extragradient on A_lam(.; x_g) producing x_f, then the gradient
    step x <- x - eta_k grad f(x_f). The gradient at x_f comes from the
    inner loop's last evaluation, so the actual cost is 2 T^k calls; the
    trace also carries the cruder 1 + 2 T^k accounting.
    """
    oracle, x0 = _prepare(problem, x0, params, "otm")
    p, M, sigma, L = params.p, params.M, params.sigma, params.L_eff
    eta = params.eta
    if eta is None:
        if not params.R:
            raise ConfigError("optimal eta needs a positive R")
        eta = optimal_eta(p, M, L, sigma, params.R)

    trace = RunTrace("otm")
    trace.metadata = _metadata(problem, params, f_star, x0)
    trace.metadata["eta"] = eta
    x, xf = x0.copy(), x0.copy()
    trace.x_f.append(xf)
    trace.x.append(x)
    coarse_calls = 0
    stream = schedule(p, eta)
    for k in range(int(params.K)):
        st = next(stream)
        xg = st.alpha_k * x + (1.0 - st.alpha_k) * xf
        max_iter = params.inner_max_iter
        if max_iter is None and params.R is not None:
            # distance bound from the potential inequality, capped generously
            dist = st.alpha_k * params.R * math.sqrt((1 + sigma) / (1 - sigma))
            max_iter = int(10 * theoretical_T_bound(st.lambda_k, dist, p, M, L, sigma)) + 100
        aux = AuxFunction(oracle, st.lambda_k, xg)
        xf_new, inner = tensor_extragradient(aux, xg, M, sigma, max_iter=max_iter,
                                             subsolver_tol=params.subsolver_tol,
                                             grad_floor_rtol=params.grad_floor_rtol,
                                             keep_iterates=params.keep_iterates)
        grad_f = inner.final_response.gradient
        x = x - st.eta_k * grad_f
        xf = xf_new
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xf))):
            raise SolverError(f"non-finite iterate at k={k}")
        coarse_calls += 1 + 2 * inner.T
        value = problem.value(xf)
        trace.records.append(IterationRecord(
            k + 1, _gap(value, f_star), oracle.calls, coarse_calls, inner.T, st.lambda_k,
            st.beta_k, st.alpha_k, st.eta_k, float(np.linalg.norm(xf - xg)), inner.lhs,
            inner.rhs, value))
        trace.T.append(inner.T)
        trace.x_g.append(xg)
        trace.x_f.append(xf)
        trace.x.append(x)
        if params.keep_iterates:
            trace.inner.append(inner)
    trace.metadata["oracle_calls"] = oracle.calls
    return trace


def _eta_from_lambda(lam, beta_prev):
    # positive root of eta^2 = lam (beta_prev + eta)
    return 0.5 * (lam + math.sqrt(lam * lam + 4.0 * lam * beta_prev))


def near_optimal_tensor_method(problem: Problem, x0, params: SolverParams,
                               f_star: Optional[float] = None) -> RunTrace:
    """Near-optimal tensor method with a bisection search on lambda.

    For a trial lambda, eta and beta follow from the A-HPE system, x_g from the
    convex combination, and x_f from one regularized model step on
    A_lambda(.; x_g) at x_g (one oracle call). A trial is accepted when
    ``lam * ||x_f - x_g||`` lies in ``[sigma/(2M + L), 2 sigma/(2M + L)]``.
    The search brackets by doubling or halving from the previous lambda and
    then bisects geometrically. After acceptance one more call provides
    grad f(x_f) for the gradient step.
    """
    oracle, x0 = _prepare(problem, x0, params, "near_optimal")
    p, M, sigma, L = params.p, params.M, params.sigma, params.L_eff
    lo_c = sigma * math.factorial(p) / (2.0 * (p * M + L))
    hi_c = sigma * math.factorial(p) / (p * M + L)

    trace = RunTrace("near_optimal")
    trace.metadata = _metadata(problem, params, f_star, x0)
    trace.metadata["search_interval"] = [lo_c, hi_c]
    x, xf = x0.copy(), x0.copy()
    trace.x_f.append(xf)
    trace.x.append(x)
    beta_prev = 0.0
    lam_guess = params.lambda0
    eye = np.eye(problem.dim)

    for k in range(int(params.K)):
        trials = 0

        def trial(lam):
            nonlocal trials
            trials += 1
            eta_k = _eta_from_lambda(lam, beta_prev)
            beta_k = beta_prev + eta_k
            alpha = eta_k / beta_k
            xg = alpha * x + (1.0 - alpha) * xf
            resp = oracle.evaluate(xg)
            sub = solve_cubic(CubicModel(resp.gradient, resp.hessian + eye / lam, M),
                              tol=params.subsolver_tol)
            return dict(lam=lam, eta=eta_k, beta=beta_k, alpha=alpha, xg=xg, xf=xg + sub.step,
                        q=lam * sub.radius, gnorm=float(np.linalg.norm(resp.gradient)))

        cur = trial(lam_guess)
        floor = params.grad_floor_rtol * (1.0 + cur["gnorm"])
        if cur["gnorm"] <= floor and cur["q"] < lo_c:
            accepted = cur  # already stationary: no step to calibrate against
        else:
            accepted = None
            below, above = None, None
            for _ in range(200):
                if cur["q"] < lo_c:
                    below = cur
                    if above is not None:
                        break
                    cur = trial(cur["lam"] * 2.0)
                elif cur["q"] > hi_c:
                    above = cur
                    if below is not None:
                        break
                    cur = trial(cur["lam"] * 0.5)
                else:
                    accepted = cur
                    break
            else:
                raise BisectionError(f"could not bracket lambda at k={k}")
            steps = 0
            while accepted is None:
                if steps >= params.bisection_max_steps:
                    raise BisectionError(f"bisection exceeded {params.bisection_max_steps} steps at k={k}")
                steps += 1
                mid = trial(math.sqrt(below["lam"] * above["lam"]))
                if mid["q"] < lo_c:
                    below = mid
                elif mid["q"] > hi_c:
                    above = mid
                else:
                    accepted = mid

        resp = oracle.evaluate(accepted["xf"])
        x = x - accepted["eta"] * resp.gradient
        xf = accepted["xf"]
        xg = accepted["xg"]
        lam = accepted["lam"]
        beta_prev = accepted["beta"]
        lam_guess = lam
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xf))):
            raise SolverError(f"non-finite iterate at k={k}")
        ms_lhs = float(np.linalg.norm(resp.gradient + (xf - xg) / lam))
        ms_rhs = sigma / lam * float(np.linalg.norm(xf - xg))
        value = problem.value(xf)
        trace.records.append(IterationRecord(
            k + 1, _gap(value, f_star), oracle.calls, oracle.calls, trials, lam, accepted["beta"],
            accepted["alpha"], accepted["eta"], float(np.linalg.norm(xf - xg)), ms_lhs, ms_rhs,
            value))
        trace.bisection_steps.append(trials)
        trace.x_g.append(xg)
        trace.x_f.append(xf)
        trace.x.append(x)
    trace.metadata["oracle_calls"] = oracle.calls
    return trace


def plain_tensor_method(problem: Problem, x0, M: float, K: int,
                        f_star: Optional[float] = None, subsolver_tol: float = 1e-12) -> RunTrace:
    """Cubic-regularized Newton method, one oracle call per iteration."""
    params = SolverParams(M=M, K=K, subsolver_tol=subsolver_tol)
    oracle, x = _prepare(problem, x0, params, "plain_tensor")
    trace = RunTrace("plain_tensor")
    trace.metadata = _metadata(problem, params, f_star, x)
    trace.x_f.append(x)
    nan = math.nan
    for k in range(int(K)):
        resp = oracle.evaluate(x)
        sub = solve_cubic(CubicModel(resp.gradient, resp.hessian, M), tol=subsolver_tol)
        x = x + sub.step
        value = problem.value(x)
        trace.records.append(IterationRecord(
            k + 1, _gap(value, f_star), oracle.calls, oracle.calls, 0, nan, nan, nan, nan,
            sub.radius, sub.residual, nan, value))
        trace.x_f.append(x)
    trace.metadata["oracle_calls"] = oracle.calls
    return trace


def inner_minimizers(problem: Problem, trace: RunTrace) -> list:
    """x^{k,*} = argmin A_{lambda_k}(.; x_g^k) for every outer iteration of a trace."""
    return [aux_minimizer(problem, r.lambda_k, xg) for r, xg in zip(trace.records, trace.x_g)]


@dataclass
class PotentialReport:
    R: float
    #: 2 beta_{K-1} gap_K + (1 - sigma^2) sum alpha^-2 ||x_f^{k+1} - x_g^k||^2, per prefix K
    weak_lhs: np.ndarray
    #: 2 beta_{K-1} gap_K + (1-sigma)/(1+sigma) sum alpha^-2 ||x_g^k - x^{k,*}||^2, per prefix K
    strong_lhs: np.ndarray
    slack: np.ndarray

    @property
    def rhs(self) -> float:
        return self.R**2

    @property
    def weak_ok(self) -> bool:
        return bool(np.all(self.weak_lhs <= self.rhs + self.slack))

    @property
    def strong_ok(self) -> bool:
        return bool(np.all(self.strong_lhs <= self.rhs + self.slack))

    @property
    def passed(self) -> bool:
        return self.weak_ok and self.strong_ok


def potential_check(trace: RunTrace, x_stars: Sequence, R: float, sigma: float,
                    f_star: Optional[float] = None, f_floor: float = 0.0,
                    rel_slack: float = 1e-6) -> PotentialReport:
    """Evaluate both potential inequalities at every prefix of an A-HPE trace.

    Slack per prefix is ``rel_slack * R^2 + 2 beta_{K-1} f_floor``, the second
    term covering the error in f*.
    """
    if not trace.x_g or len(x_stars) != trace.K:
        raise ValueError("potential check needs x_g iterates and one inner minimizer per iteration")
    if f_star is None:
        f_star = trace.metadata.get("f_star")
    if f_star is None:
        raise ValueError("potential check needs f*")
    beta = trace.column("beta_k")
    alpha = trace.column("alpha_k")
    values = trace.column("value")
    d_step = np.array([np.sum((xf - xg) ** 2) for xf, xg in zip(trace.x_f[1:], trace.x_g)])
    d_star = np.array([np.sum((xg - xs) ** 2) for xg, xs in zip(trace.x_g, x_stars)])
    fval = 2.0 * beta * (values - f_star)
    weak = fval + (1 - sigma**2) * np.cumsum(d_step / alpha**2)
    strong = fval + (1 - sigma) / (1 + sigma) * np.cumsum(d_star / alpha**2)
    slack = rel_slack * R**2 + 2.0 * beta * f_floor
    return PotentialReport(float(R), weak, strong, slack)


def ms_condition_residuals(problem: Problem, trace: RunTrace, grad_floor_rtol: Optional[float] = None):
    """Independent re-evaluation of the inexact prox condition along a trace.

    Returns ``(lhs, rhs, floor)`` per outer iteration with
    lhs = ||grad f(x_f) + (x_f - x_g)/lam||, rhs = sigma/lam ||x_f - x_g|| and
    floor = grad_floor_rtol (1 + ||grad f(x_g)||), the rounding level below
    which the inner loop accepts a point regardless of rhs.
    """
    params = trace.metadata["params"]
    sigma = params["sigma"]
    if grad_floor_rtol is None:
        grad_floor_rtol = params.get("grad_floor_rtol", 0.0)
    out = []
    for r, xg, xf in zip(trace.records, trace.x_g, trace.x_f[1:]):
        g = problem.gradient(xf)
        lhs = float(np.linalg.norm(g + (xf - xg) / r.lambda_k))
        rhs = sigma / r.lambda_k * float(np.linalg.norm(xf - xg))
        floor = grad_floor_rtol * (1.0 + float(np.linalg.norm(problem.gradient(xg))))
        out.append((lhs, rhs, floor))
    return out
