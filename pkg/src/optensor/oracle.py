"""Second-order oracles, the built-in convex test problems, and reference solutions.

A single oracle call returns the value, gradient and Hessian of the objective
together. :class:`CountedOracle` counts those calls; solver code only touches
problems through it, while reporting code (gaps, verification) may use the raw
problem freely.

The problem suite (quadratic, logistic regression, smoothed log-sum-exp and the
cubic power function) is a choice of this package, not something fixed by the
method itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.special import expit, logsumexp, softmax

from .errors import ConfigError, OracleError, SolverError, UnsupportedOrderError

#: max |phi'''(t)| for phi(t) = log(1 + e^t); attained at s(1-s)(1-2s) with s = (3 - sqrt 3)/6
LOGISTIC_THIRD_DERIVATIVE_MAX = 1.0 / (6.0 * math.sqrt(3.0))

PROBLEM_KINDS = ("quadratic", "logistic", "logsumexp", "power")


@dataclass(frozen=True)
class OracleResponse:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray


def as_point(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate and convert ``x`` to a finite float vector of length ``dim``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise OracleError(f"point must be a 1-d vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise OracleError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise OracleError("point has non-finite entries")
    return arr


class Problem:
    """Base class for a twice differentiable convex objective on R^d."""

    kind = "abstract"

    def __init__(self, dim: int):
        self.dim = int(dim)

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x) -> OracleResponse:
        x = as_point(x, self.dim)
        h = self.hessian(x)
        return OracleResponse(self.value(x), self.gradient(x), 0.5 * (h + h.T))

    def lipschitz_bound(self) -> float:
        """Upper bound on the Lipschitz constant of the Hessian (operator norm)."""
        raise NotImplementedError

    def minimizer(self) -> Optional[np.ndarray]:
        """Closed-form minimizer, or None when none is available."""
        return None


class QuadraticProblem(Problem):
    """f(x) = 1/2 x^T Q x - b^T x with Q symmetric positive definite."""

    kind = "quadratic"

    def __init__(self, Q, b):
        Q = np.asarray(Q, dtype=float)
        b = np.asarray(b, dtype=float)
        super().__init__(b.shape[0])
        if Q.shape != (self.dim, self.dim):
            raise ConfigError(f"Q must be {self.dim}x{self.dim}, got {Q.shape}")
        self.Q = 0.5 * (Q + Q.T)
        self.b = b

    def value(self, x):
        return float(0.5 * x @ self.Q @ x - self.b @ x)

    def gradient(self, x):
        return self.Q @ x - self.b

    def hessian(self, x):
        return self.Q.copy()

    def lipschitz_bound(self):
        return 0.0

    def minimizer(self):
        return np.linalg.solve(self.Q, self.b)

    def prox_minimizer(self, lam: float, z: np.ndarray) -> np.ndarray:
        """argmin_x f(x) + ||x - z||^2 / (2 lam), in closed form."""
        A = self.Q + np.eye(self.dim) / lam
        return np.linalg.solve(A, self.b + np.asarray(z) / lam)


class LogisticProblem(Problem):
    """Mean logistic loss (1/n) sum log(1 + exp(-y_i <a_i, x>)) plus optional l2 term."""

    kind = "logistic"

    def __init__(self, A, y, l2: float = 0.0):
        self.A = np.asarray(A, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if self.A.ndim != 2 or self.y.shape != (self.A.shape[0],):
            raise ConfigError("logistic data must be an (n, d) matrix and n labels")
        super().__init__(self.A.shape[1])
        self.n = self.A.shape[0]
        self.l2 = float(l2)
        self._Ay = self.A * self.y[:, None]

    def value(self, x):
        m = self._Ay @ x
        return float(np.mean(np.logaddexp(0.0, -m)) + 0.5 * self.l2 * (x @ x))

    def gradient(self, x):
        m = self._Ay @ x
        return -self._Ay.T @ expit(-m) / self.n + self.l2 * x

    def hessian(self, x):
        s = expit(self._Ay @ x)
        w = s * (1.0 - s)
        return (self.A.T * w) @ self.A / self.n + self.l2 * np.eye(self.dim)

    def lipschitz_bound(self):
        max_norm = np.max(np.linalg.norm(self.A, axis=1))
        return float(max_norm**3 * LOGISTIC_THIRD_DERIVATIVE_MAX)


class LogSumExpProblem(Problem):
    """Smoothed max: f(x) = mu * log sum_i exp((<a_i, x> - b_i) / mu), plus optional l2 term."""

    kind = "logsumexp"

    def __init__(self, A, b, mu: float = 1.0, l2: float = 0.0, lipschitz: Optional[float] = None,
                 seed: int = 0):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        super().__init__(self.A.shape[1])
        if mu <= 0:
            raise ConfigError("logsumexp smoothing mu must be positive")
        self.mu = float(mu)
        self.l2 = float(l2)
        self._configured_lipschitz = lipschitz
        self._seed = seed
        self._lipschitz_cache: Optional[float] = None
        self.lipschitz_source = "configured" if lipschitz is not None else "estimated"

    def _u(self, x):
        return (self.A @ x - self.b) / self.mu

    def value(self, x):
        return float(self.mu * logsumexp(self._u(x)) + 0.5 * self.l2 * (x @ x))

    def gradient(self, x):
        return self.A.T @ softmax(self._u(x)) + self.l2 * x

    def hessian(self, x):
        pi = softmax(self._u(x))
        Api = self.A.T @ pi
        return ((self.A.T * pi) @ self.A - np.outer(Api, Api)) / self.mu + self.l2 * np.eye(self.dim)

    def analytic_lipschitz_bound(self) -> float:
        # |D^3 f[h]^3| = |E(Z - EZ)^3| / mu^2 <= 2 max_i ||a_i||^3 ||h||^3 / mu^2
        max_norm = np.max(np.linalg.norm(self.A, axis=1))
        return float(2.0 * max_norm**3 / self.mu**2)

    def estimate_lipschitz(self, n_samples: int = 200, step: float = 1e-4) -> float:
        """Largest sampled ||H(x + t u) - H(x)|| / t over random x and unit u."""
        rng = np.random.default_rng(self._seed + 7919)
        best = 0.0
        for _ in range(n_samples):
            x = rng.standard_normal(self.dim) * self.mu
            u = rng.standard_normal(self.dim)
            u /= np.linalg.norm(u)
            diff = self.hessian(x + step * u) - self.hessian(x)
            best = max(best, np.linalg.norm(diff, 2) / step)
        return float(best)

    def lipschitz_bound(self):
        if self._configured_lipschitz is not None:
            return float(self._configured_lipschitz)
        if self._lipschitz_cache is None:
            estimate = 2.0 * self.estimate_lipschitz()
            analytic = self.analytic_lipschitz_bound()
            self._lipschitz_cache = min(estimate, analytic)
            self.lipschitz_source = "estimated" if estimate < analytic else "analytic"
        return self._lipschitz_cache


class PowerProblem(Problem):
    """f(x) = 1/3 sum_i |x_i - c_i|^3. Minimizer c, optimal value 0, Hessian Lipschitz constant 2."""

    kind = "power"

    def __init__(self, center):
        self.center = np.asarray(center, dtype=float)
        super().__init__(self.center.shape[0])

    def value(self, x):
        return float(np.sum(np.abs(x - self.center) ** 3) / 3.0)

    def gradient(self, x):
        r = x - self.center
        return r * np.abs(r)

    def hessian(self, x):
        return np.diag(2.0 * np.abs(x - self.center))

    def lipschitz_bound(self):
        return 2.0

    def minimizer(self):
        return self.center.copy()


@dataclass
class ProblemSpec:
    """Recipe for a seeded problem instance.

    ``params`` holds kind-specific options:

    * quadratic: ``mu`` (smallest eigenvalue, 0.01), ``smoothness`` (largest, 1.0)
    * logistic: ``n_samples`` (100), ``noise`` (label-flip logit scale, 0.5),
      ``scale`` (feature scale, 1.0), ``l2`` (0.0)
    * logsumexp: ``n_terms`` (3*dim), ``mu`` (1.0), ``l2`` (0.0), ``lipschitz`` (None)
    * power: ``radius`` (1.0), the standard deviation of the random center
    """

    kind: str
    dim: int
    seed: int = 0
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "dim": self.dim, "seed": self.seed, "params": dict(self.params)}


def make_problem(spec: ProblemSpec) -> Problem:
    """Build the problem described by ``spec``. Identical specs give bit-identical data."""
    if spec.kind not in PROBLEM_KINDS:
        raise ConfigError(f"unknown problem kind {spec.kind!r}; expected one of {PROBLEM_KINDS}")
    if int(spec.dim) < 1:
        raise ConfigError("problem dimension must be positive")
    d = int(spec.dim)
    rng = np.random.default_rng(spec.seed)
    prm = spec.params

    if spec.kind == "quadratic":
        mu = float(prm.get("mu", 1e-2))
        smooth = float(prm.get("smoothness", 1.0))
        if not 0 < mu <= smooth:
            raise ConfigError("quadratic needs 0 < mu <= smoothness")
        U, _ = np.linalg.qr(rng.standard_normal((d, d)))
        eig = np.geomspace(mu, smooth, d) if d > 1 else np.array([smooth])
        b = rng.standard_normal(d)
        return QuadraticProblem((U * eig) @ U.T, b)

    if spec.kind == "logistic":
        n = int(prm.get("n_samples", 100))
        scale = float(prm.get("scale", 1.0))
        noise = float(prm.get("noise", 0.5))
        A = rng.standard_normal((n, d)) * scale / math.sqrt(d)
        w = rng.standard_normal(d)
        logits = (A @ w) / max(noise, 1e-12)
        y = np.where(rng.random(n) < expit(logits), 1.0, -1.0)
        return LogisticProblem(A, y, l2=float(prm.get("l2", 0.0)))

    if spec.kind == "logsumexp":
        n = int(prm.get("n_terms", 3 * d))
        A = rng.standard_normal((n, d))
        A -= A.mean(axis=0)  # keeps 0 inside the hull of the rows, so a minimizer exists
        b = rng.standard_normal(n)
        return LogSumExpProblem(A, b, mu=float(prm.get("mu", 1.0)), l2=float(prm.get("l2", 0.0)),
                                lipschitz=prm.get("lipschitz"), seed=spec.seed)

    center = rng.standard_normal(d) * float(prm.get("radius", 1.0))
    return PowerProblem(center)


def lipschitz_bound(problem, p: int = 2) -> float:
    """Upper bound on L_p for a problem (or a :class:`ProblemSpec`). Only p=2 is available."""
    if p != 2:
        raise UnsupportedOrderError(f"only second-order Lipschitz constants are provided, got p={p}")
    if isinstance(problem, ProblemSpec):
        problem = make_problem(problem)
    if not isinstance(problem, Problem):
        raise ConfigError(f"unknown problem {problem!r}")
    return problem.lipschitz_bound()


class CountedOracle:
    """Wraps a :class:`Problem` and counts oracle calls.

    Every :meth:`evaluate` is one call and returns value, gradient and Hessian
    at once. The counter belongs to one solver run.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self.calls = 0

    @property
    def dim(self) -> int:
        return self.problem.dim

    def evaluate(self, x) -> OracleResponse:
        x = as_point(x, self.problem.dim)
        self.calls += 1
        return self.problem.evaluate(x)

    __call__ = evaluate


def evaluate(oracle: CountedOracle, x) -> OracleResponse:
    return oracle.evaluate(x)


def reference_solution(problem, tol: float = 1e-12, x0=None, max_iter: int = 50_000):
    """High-accuracy minimizer and optimal value, used for gaps and for R.

    Closed form for quadratic and power problems, otherwise a long run of the
    cubic-regularized Newton method until ``||grad f|| <= tol``.
    """
    from .subsolver import CubicModel, solve_cubic

    if isinstance(problem, ProblemSpec):
        problem = make_problem(problem)
    if tol <= 0:
        raise ValueError("tol must be positive")
    x_star = problem.minimizer()
    if x_star is not None:
        return x_star, problem.value(x_star)

    M = max(problem.lipschitz_bound(), 1e-8)
    x = np.zeros(problem.dim) if x0 is None else as_point(x0, problem.dim).copy()
    for _ in range(max_iter):
        resp = problem.evaluate(x)
        if np.linalg.norm(resp.gradient) <= tol:
            return x, resp.value
        step = solve_cubic(CubicModel(resp.gradient, resp.hessian, M)).step
        if not np.any(step):
            break
        x = x + step
    # cubic steps can stall on rounding just above tol; finish with plain Newton steps
    for _ in range(20):
        resp = problem.evaluate(x)
        if np.linalg.norm(resp.gradient) <= tol:
            return x, resp.value
        x = x - np.linalg.solve(resp.hessian, resp.gradient)
    raise SolverError(f"reference solution did not reach ||grad|| <= {tol:g} "
                      f"(got {np.linalg.norm(problem.gradient(x)):.3e})")
