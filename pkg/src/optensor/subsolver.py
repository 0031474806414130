"""Exact minimization of the cubic-regularized quadratic model.

The model is

    m(d) = <g, d> + 1/2 <H d, d> + (M/3) ||d||^3,

whose stationarity condition is ``(H + M r I) d = -g`` with ``r = ||d||``.
Writing ``H = V diag(lam) V^T`` turns this into a scalar equation for the
radius r, solved here by safeguarded Newton iterations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SubsolverError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CubicModel:
    g: np.ndarray
    H: np.ndarray
    M: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        H = np.asarray(self.H, dtype=float)
        if g.ndim != 1 or H.shape != (g.shape[0], g.shape[0]):
            raise SubsolverError(f"incompatible shapes g{g.shape}, H{H.shape}")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(H)) and np.isfinite(self.M)):
            raise SubsolverError("cubic model has non-finite data")
        if self.M <= 0:
            raise SubsolverError(f"regularization M must be positive, got {self.M}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "H", 0.5 * (H + H.T))

    def value(self, d: np.ndarray) -> float:
        return float(self.g @ d + 0.5 * d @ self.H @ d + self.M / 3.0 * np.linalg.norm(d) ** 3)

    def gradient(self, d: np.ndarray) -> np.ndarray:
        return self.g + self.H @ d + self.M * np.linalg.norm(d) * d


@dataclass(frozen=True)
class SubsolverResult:
    step: np.ndarray
    radius: float
    residual: float
    iterations: int
    #: eigenvalues of H, kept for the optimality certificate
    eigvals: np.ndarray
    hard_case: bool = False

    def certificate(self, M: float) -> float:
        """Smallest eigenvalue of H + M r I; positive certifies the global minimizer."""
        return float(self.eigvals[0] + M * self.radius)


def secular_root(eigvals, projected_g, M: float, tol: float = 1e-15, max_iter: int = 100):
    """Root r >= 0 of phi(r) = ||(diag(eigvals) + M r I)^{-1} g_hat|| - r.

    On ``r > max(0, -min(eigvals)/M)`` phi is convex and decreasing, so Newton
    iterates started left of the root increase monotonically towards it. A
    bracket is kept and bisection takes over whenever a Newton step leaves it.

    Returns ``(r, iterations)``. In the hard case (the gradient has no
    component along the bottom eigenvector and phi is already negative at
    the pole) the pole location is returned; :func:`solve_cubic` completes the
    step with an eigenvector component.
    """
    lam = np.asarray(eigvals, dtype=float)
    ghat = np.asarray(projected_g, dtype=float)
    if M <= 0:
        raise SubsolverError("M must be positive")
    gnorm = np.linalg.norm(ghat)
    lam_min = lam.min()
    r_lo = max(0.0, -lam_min / M)
    if gnorm == 0.0:
        return r_lo, 0
    # components on (numerically) the bottom eigenspace blow phi up at the pole
    scale = max(np.abs(lam).max(), M * r_lo, 1.0)
    bottom = lam - lam_min <= 1e3 * _EPS * scale
    if lam_min <= 0.0 and np.linalg.norm(ghat[bottom]) <= 1e3 * _EPS * gnorm:
        rest = ~bottom
        if not rest.any() or np.linalg.norm(ghat[rest] / (lam[rest] + M * r_lo)) <= r_lo:
            return r_lo, 0

    def phi(r):
        denom = lam + M * r
        d = ghat / denom
        nd = np.linalg.norm(d)
        dnd = -M * np.sum(d * d / denom) / nd if nd > 0 else -np.inf
        return nd - r, dnd - 1.0

    # upper end of the bracket: phi(r_hi) < 0
    r_hi = max(2.0 * r_lo, np.sqrt(gnorm / M), 1e-300)
    for _ in range(200):
        if phi(r_hi)[0] < 0:
            break
        r_hi *= 2.0
    else:
        raise SubsolverError("secular bracket expansion exceeded 200 doublings")

    lo = r_lo
    hi = r_hi
    # phi(0) > 0 when H is positive definite; otherwise start inside the bracket
    r = r_lo if lam_min > 0 else 0.5 * (r_lo + r_hi)
    it = 0
    for it in range(1, max_iter + 1):
        val, der = phi(r)
        if abs(val) <= tol * max(1.0, r):
            return r, it
        if val > 0:
            lo = r
        else:
            hi = r
        r_new = r - val / der if np.isfinite(der) and der < 0 else 0.5 * (lo + hi)
        if not (lo < r_new < hi) or r_new == r:
            r_new = 0.5 * (lo + hi)
        if hi - lo <= 4 * _EPS * max(hi, 1e-300):
            return r_new, it
        r = r_new
    return r, it


def solve_cubic(model: CubicModel, tol: float = 1e-12, refine: int = 3) -> SubsolverResult:
    """Global minimizer of the cubic model.

    The returned step satisfies ``||g + H d + M ||d|| d|| <= tol * max(1, ||g||)``
    up to rounding; a few Newton refinement steps on the full stationarity
    system clean up what the eigenbasis solve leaves behind.
    """
    g, H, M = model.g, model.H, model.M
    n = g.shape[0]
    gnorm = np.linalg.norm(g)
    try:
        lam, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SubsolverError(f"eigendecomposition failed: {exc}") from exc
    if gnorm == 0.0 and lam[0] >= 0:
        return SubsolverResult(np.zeros(n), 0.0, 0.0, 0, lam)

    ghat = V.T @ g
    r, iters = secular_root(lam, ghat, M)
    hard = False
    denom = lam + M * r
    if np.any(denom <= 0) or (lam[0] <= 0 and r <= -lam[0] / M * (1 + 1e-12)):
        # hard case: fill the remaining radius along the bottom eigenvector
        hard = True
        bottom = lam - lam[0] <= 1e3 * _EPS * max(np.abs(lam).max(), 1.0)
        dhat = np.zeros(n)
        dhat[~bottom] = -ghat[~bottom] / denom[~bottom]
        tau = np.sqrt(max(r * r - dhat @ dhat, 0.0))
        dhat[np.argmax(bottom)] += tau
        d = V @ dhat
    else:
        d = -V @ (ghat / denom)

    target = tol * max(1.0, gnorm)
    res = model.gradient(d)
    for _ in range(refine if not hard else 0):
        if np.linalg.norm(res) <= 0.1 * target:
            break
        # Jacobian of F(d) = g + H d + M||d|| d is H + M||d|| I + M d d^T / ||d||
        nd = np.linalg.norm(d)
        if nd == 0:
            break
        D = lam + M * nd
        if np.any(D <= 0):
            break
        u = V.T @ d
        rhs = V.T @ res
        base = rhs / D
        w = u / D
        coef = (M / nd) * (u @ base) / (1.0 + (M / nd) * (u @ w))
        d = d - V @ (base - coef * w)
        res = model.gradient(d)

    radius = float(np.linalg.norm(d))
    if not np.all(np.isfinite(d)):
        raise SubsolverError("non-finite step")
    return SubsolverResult(d, radius, float(np.linalg.norm(res)), iters, lam, hard)


def verify_step(objective, z, d, M: float, L: float) -> float:
    """Ratio ||grad F(z + d)|| / (((2M + L)/2) ||d||^2) for a cubic step d taken at z.

    ``objective`` is anything with a ``gradient(x)`` method (a problem, or an
    :class:`~optensor.model.AuxFunction`). The step bound guarantees the ratio
    is at most 1 (plus subproblem residual) whenever M and L bound the
    Hessian's Lipschitz constant. Returns 0 when d = 0.
    """
    z = np.asarray(z, dtype=float)
    d = np.asarray(d, dtype=float)
    denom = 0.5 * (2.0 * M + L) * float(d @ d)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(objective.gradient(z + d)) / denom)
