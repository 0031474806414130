"""Second-order Taylor models and the proximal auxiliary function.

The auxiliary function of a problem f with anchor z and step lam is

    A(x) = f(x) + ||x - z||^2 / (2 lam),

which is (1/lam)-strongly convex and has the same Hessian Lipschitz constant
as f.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedOrderError
from .oracle import CountedOracle, OracleResponse, as_point


@dataclass(frozen=True)
class TaylorModel:
    center: np.ndarray
    base: OracleResponse
    order: int = 2

    @property
    def gradient(self) -> np.ndarray:
        return self.base.gradient

    @property
    def hessian(self) -> np.ndarray:
        return self.base.hessian


def _require_order_two(model: TaylorModel):
    if model.order != 2:
        raise UnsupportedOrderError(f"only order-2 models are implemented, got p={model.order}")


def taylor_model(oracle: CountedOracle, center) -> TaylorModel:
    """Order-2 model of f at ``center``; costs one oracle call."""
    center = as_point(center, oracle.dim)
    return TaylorModel(center, oracle.evaluate(center))


def taylor_value(model: TaylorModel, x) -> float:
    _require_order_two(model)
    h = as_point(x, model.center.shape[0]) - model.center
    return float(model.base.value + model.gradient @ h + 0.5 * h @ model.hessian @ h)


def taylor_gradient(model: TaylorModel, x) -> np.ndarray:
    _require_order_two(model)
    h = as_point(x, model.center.shape[0]) - model.center
    return model.gradient + model.hessian @ h


def regularized_model_value(model: TaylorModel, x, M: float) -> float:
    """Taylor model plus the (pM/(p+1)!) ||x - z||^(p+1) regularizer (M/3 for p = 2)."""
    if M <= 0:
        raise ValueError(f"M must be positive, got {M}")
    _require_order_two(model)
    p = model.order
    r = np.linalg.norm(as_point(x, model.center.shape[0]) - model.center)
    return taylor_value(model, x) + p * M / math.factorial(p + 1) * r ** (p + 1)


class AuxFunction:
    """A(x; z) = f(x) + ||x - z||^2 / (2 lam).

    Every evaluation goes through the counted oracle of f, one call each.
    """

    def __init__(self, oracle: CountedOracle, lam: float, anchor):
        if not lam > 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        self.oracle = oracle
        self.lam = float(lam)
        self.anchor = as_point(anchor, oracle.dim)

    @property
    def dim(self) -> int:
        return self.oracle.dim

    def evaluate(self, x) -> tuple[float, np.ndarray, OracleResponse]:
        """Value and gradient of A at x together with the raw response for f."""
        x = as_point(x, self.dim)
        resp = self.oracle.evaluate(x)
        h = x - self.anchor
        return resp.value + 0.5 * (h @ h) / self.lam, resp.gradient + h / self.lam, resp

    def value(self, x) -> float:
        return self.evaluate(x)[0]

    def gradient(self, x) -> np.ndarray:
        return self.evaluate(x)[1]


def aux_value(aux: AuxFunction, x) -> float:
    return aux.value(x)


def aux_gradient(aux: AuxFunction, x) -> np.ndarray:
    return aux.gradient(x)


def aux_taylor(aux: AuxFunction, center) -> TaylorModel:
    """Order-2 Taylor model of A at ``center`` (one oracle call)."""
    center = as_point(center, aux.dim)
    val, grad, resp = aux.evaluate(center)
    hess = resp.hessian + np.eye(aux.dim) / aux.lam
    return TaylorModel(center, OracleResponse(val, grad, hess))


def aux_minimizer(problem, lam: float, anchor, tol: float = 1e-13, max_iter: int = 200) -> np.ndarray:
    """High-accuracy minimizer of A(.; anchor) on the raw (uncounted) problem.

    Closed form for quadratics; otherwise damped Newton iterations, which are
    safe because A is strongly convex.
    """
    anchor = np.asarray(anchor, dtype=float)
    if hasattr(problem, "prox_minimizer"):
        return problem.prox_minimizer(lam, anchor)
    x = anchor.copy()
    eye = np.eye(anchor.shape[0])

    def a_val(y):
        return problem.value(y) + 0.5 * np.sum((y - anchor) ** 2) / lam

    def a_grad(y):
        return problem.gradient(y) + (y - anchor) / lam

    for _ in range(max_iter):
        g = a_grad(x)
        gnorm = np.linalg.norm(g)
        if gnorm <= tol * (1.0 + np.linalg.norm(anchor) / lam):
            break
        step = -np.linalg.solve(problem.hessian(x) + eye / lam, g)
        t, fx = 1.0, a_val(x)
        # near the minimizer value differences drown in rounding; a smaller gradient also accepts
        while (a_val(x + t * step) > fx + 0.25 * t * (g @ step)
               and np.linalg.norm(a_grad(x + t * step)) >= gnorm and t > 1e-10):
            t *= 0.5
        x = x + t * step
    return x
