"""Parameter schedules and complexity constants for the optimal tensor method.

Everything here is closed form and valid for any order p >= 2, even though
only p = 2 steps are runnable elsewhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class ScheduleState:
    p: int
    eta: float
    k: int
    eta_k: float
    beta_k: float
    lambda_k: float
    alpha_k: float
    #: Kahan compensation carried into the next running-sum update of beta
    carry: float = 0.0


def _check_p(p):
    if int(p) != p or p < 2:
        raise ValueError(f"order p must be an integer >= 2, got {p}")


def step_schedule(p: int, eta: float, k: int, beta_prev: float, carry: float = 0.0) -> ScheduleState:
    """Parameters of outer iteration ``k`` given ``beta_{k-1}`` (0 for k = 0).

    eta_k = eta (1+k)^((3p-1)/2), beta_k = beta_{k-1} + eta_k,
    lambda_k = eta_k^2 / beta_k, alpha_k = eta_k / beta_k.
    The running sum is Kahan-compensated through ``carry``.
    """
    _check_p(p)
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if k < 0 or beta_prev < 0:
        raise ValueError("need k >= 0 and beta_prev >= 0")
    eta_k = eta * (1.0 + k) ** ((3 * p - 1) / 2)
    y = eta_k - carry
    beta_k = beta_prev + y
    carry = (beta_k - beta_prev) - y
    return ScheduleState(p, eta, k, eta_k, beta_k, eta_k * eta_k / beta_k, eta_k / beta_k, carry)


def schedule(p: int, eta: float) -> Iterator[ScheduleState]:
    """Infinite stream of schedule states for k = 0, 1, 2, ..."""
    beta, carry, k = 0.0, 0.0, 0
    while True:
        st = step_schedule(p, eta, k, beta, carry)
        yield st
        beta, carry, k = st.beta_k, st.carry, k + 1


def schedule_bounds(p: int, eta: float, k: int) -> tuple[float, float]:
    """Lower bound on beta_k and upper bound on lambda_k from the integral comparison."""
    _check_p(p)
    beta_lower = 2.0 * eta / (3 * p + 1) * (k + 1.0) ** ((3 * p + 1) / 2)
    lambda_upper = eta * (3 * p + 1) / 2.0 * (1.0 + k) ** (3 * (p - 1) / 2)
    return beta_lower, lambda_upper


def c_p(p: int, M: float, L: float, sigma: float) -> float:
    """Inner-loop constant C_p(M, sigma), evaluated in log space.

    C_p = p^p M^p (1 + 1/sigma) / (p! (pM - L)^(p/2) (pM + L)^(p/2 - 1))
    """
    _check_p(p)
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    if M <= 0 or L < 0:
        raise ValueError("need M > 0 and L >= 0")
    if p * M - L <= 0:
        raise ValueError(f"C_p needs pM > L (p={p}, M={M}, L={L})")
    log_c = (p * math.log(p) + p * math.log(M) + math.log1p(1.0 / sigma) - math.lgamma(p + 1)
             - 0.5 * p * math.log(p * M - L) - (0.5 * p - 1) * math.log(p * M + L))
    return math.exp(log_c)


def _eta_inverse_factor(p, M, L, sigma, R):
    # (3p+1)^p C_p R^(p-1) / (2^p sqrt p) * ((1+sigma)/(1-sigma))^((p-1)/2)
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    if sigma >= 1:
        raise ValueError("sigma must be < 1")
    return ((3 * p + 1) ** p * c_p(p, M, L, sigma) * R ** (p - 1) / (2 ** p * math.sqrt(p))
            * ((1 + sigma) / (1 - sigma)) ** ((p - 1) / 2))


def optimal_eta(p: int, M: float, L: float, sigma: float, R: float) -> float:
    """The eta that caps the total inner iterations at 2K + 1."""
    return 1.0 / _eta_inverse_factor(p, M, L, sigma, R)


def total_inner_bound(p: int, eta: float, M: float, L: float, sigma: float, R: float, K: int) -> float:
    """Upper bound on sum_{k<K} T^k for a run with parameter eta."""
    factor = eta * _eta_inverse_factor(p, M, L, sigma, R)
    return K + (1 + K) * factor ** (2.0 / p)


def d_p(p: int) -> float:
    """Constant D_p of the total oracle-complexity bound."""
    _check_p(p)
    log_num = (0.5 * (p + 1) * math.log(3) + (p + 1) * math.log(3 * p + 1) + p * math.log(p)
               + math.log(p + 1))
    log_den = ((p + 2) * math.log(2) + 0.5 * math.log(p) + math.lgamma(p + 1)
               + 0.5 * p * math.log(p * p - 1))
    return math.exp(2.0 / (3 * p + 1) * (log_num - log_den))


def oracle_complexity_bound(p: int, L: float, R: float, eps: float) -> float:
    """5 D_p (L R^(p+1) / eps)^(2/(3p+1)) + 7, valid for M = L, sigma = 1/2 and the optimal eta."""
    return 5.0 * d_p(p) * (L * R ** (p + 1) / eps) ** (2.0 / (3 * p + 1)) + 7.0
