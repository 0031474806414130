"""Tensor extragradient method for approximate proximal steps.

Given the auxiliary function A(.; x_g) with step lam, the loop alternates a
regularized model step (the half point) with an explicit gradient correction,
and stops as soon as the half point satisfies

    ||grad A(x_half)|| <= sigma / lam * ||x_half - x_start||.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InnerLoopError
from .model import AuxFunction, aux_taylor
from .oracle import OracleResponse
from .schedule import c_p
from .subsolver import CubicModel, solve_cubic

ZERO_STEP_RTOL = 1e-14
GRAD_FLOOR_RTOL = 1e-12
DEFAULT_MAX_ITER = 10_000


@dataclass
class InnerTrace:
    iterates: list = field(default_factory=list)
    halves: list = field(default_factory=list)
    gammas: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    T: int = 0
    lhs: float = math.nan
    rhs: float = math.nan
    oracle_calls: int = 0
    #: True when the exit came from the rounding floor rather than the sigma test
    floor_exit: bool = False
    grad_floor: float = 0.0
    final_response: Optional[OracleResponse] = None
    final_aux_gradient: Optional[np.ndarray] = None


def extragradient_step(x, half, grad_half, M: float, p: int = 2) -> np.ndarray:
    """x - gamma * grad_half with gamma = (p-1)! / (M ||half - x||^(p-1))."""
    x = np.asarray(x, dtype=float)
    dist = np.linalg.norm(np.asarray(half, dtype=float) - x)
    if dist <= ZERO_STEP_RTOL * (1.0 + np.linalg.norm(x)):
        raise InnerLoopError("zero displacement: test termination at the half point instead")
    gamma = math.factorial(p - 1) / (M * dist ** (p - 1))
    return x - gamma * np.asarray(grad_half, dtype=float)


def theoretical_T_bound(lam: float, dist: float, p: int, M: float, L: float, sigma: float) -> float:
    """(lam C_p dist^(p-1))^(2/p) + 1, the worst-case inner iteration count."""
    return (lam * c_p(p, M, L, sigma) * dist ** (p - 1)) ** (2.0 / p) + 1.0


def tensor_extragradient(aux: AuxFunction, x_start, M: float, sigma: float,
                         max_iter: Optional[int] = None, subsolver_tol: float = 1e-12,
                         grad_floor_rtol: float = GRAD_FLOOR_RTOL, keep_iterates: bool = True):
    """Run the inner loop on ``aux`` from ``x_start`` (normally the anchor).

    Each iteration costs two oracle calls: the Taylor model at x^t and the
    gradient of A at the half point. Returns ``(x_f, trace)`` where x_f is the
    final half point.

    Besides the sigma test, the loop accepts a half point whose gradient norm
    is below ``grad_floor_rtol * (1 + ||grad A(x_start)||)``; at that level the
    gradient is rounding noise and the extragradient correction would divide
    noise by a vanishing step. Pass ``grad_floor_rtol=0`` to disable.

    Raises
    ------
    InnerLoopError
        If ``max_iter`` iterations pass without termination, or a zero-length
        model step is taken at a point with non-negligible gradient.
    """
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    if M <= 0:
        raise ValueError("M must be positive")
    max_iter = DEFAULT_MAX_ITER if max_iter is None else int(max_iter)
    oracle = aux.oracle
    calls0 = oracle.calls
    x0 = np.asarray(x_start, dtype=float)
    x = x0
    trace = InnerTrace()
    floor = None

    for t in range(max_iter):
        model = aux_taylor(aux, x)
        if floor is None:
            floor = grad_floor_rtol * (1.0 + np.linalg.norm(model.gradient))
            trace.grad_floor = floor
        sub = solve_cubic(CubicModel(model.gradient, model.hessian, M), tol=subsolver_tol)
        half = x + sub.step
        _, grad_half, resp = aux.evaluate(half)
        gnorm = float(np.linalg.norm(grad_half))
        rhs = sigma / aux.lam * float(np.linalg.norm(half - x0))
        if keep_iterates:
            trace.iterates.append(x)
            trace.halves.append(half)
        trace.grad_norms.append(gnorm)

        zero_step = sub.radius <= ZERO_STEP_RTOL * (1.0 + np.linalg.norm(x))
        done = gnorm <= rhs or gnorm <= floor
        if zero_step and not done:
            raise InnerLoopError(
                f"zero-length model step with ||grad A|| = {gnorm:.3e} > {max(rhs, floor):.3e}")
        if not zero_step:
            gamma = 1.0 / (M * sub.radius)
            trace.gammas.append(gamma)
            x_next = x - gamma * grad_half
        else:
            x_next = half
        if done:
            if keep_iterates:
                trace.iterates.append(x_next)
            trace.T = t + 1
            trace.lhs, trace.rhs = gnorm, rhs
            trace.floor_exit = gnorm > rhs
            trace.oracle_calls = oracle.calls - calls0
            trace.final_response = resp
            trace.final_aux_gradient = grad_half
            return half, trace
        x = x_next

    raise InnerLoopError(f"inner loop did not terminate within {max_iter} iterations")
