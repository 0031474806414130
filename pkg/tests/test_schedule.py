import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optensor.oracle import PowerProblem
from optensor.schedule import (c_p, d_p, oracle_complexity_bound, optimal_eta, schedule,
                              schedule_bounds, step_schedule, total_inner_bound)


def test_first_states():
    st0 = step_schedule(2, 1.0, 0, 0.0)
    assert (st0.eta_k, st0.beta_k, st0.lambda_k, st0.alpha_k) == (1.0, 1.0, 1.0, 1.0)
    st1 = step_schedule(2, 1.0, 1, st0.beta_k, st0.carry)
    assert st1.eta_k == pytest.approx(2 ** 2.5, rel=1e-15)
    assert st1.beta_k == pytest.approx(6.656854, abs=1e-6)
    assert st1.lambda_k == pytest.approx(32 / (1 + 2 ** 2.5), rel=1e-14)
    # 32 / 6.656854 = 4.807075; the commonly quoted 4.807090 is off in the fifth decimal
    assert st1.lambda_k == pytest.approx(4.807075, abs=1e-6)
    assert st1.alpha_k == pytest.approx(2 ** 2.5 / (1 + 2 ** 2.5), rel=1e-15)
    assert st1.alpha_k == pytest.approx(0.849780, abs=2e-6)
    s3 = step_schedule(3, 0.5, 0, 0.0)
    assert (s3.eta_k, s3.beta_k, s3.lambda_k, s3.alpha_k) == (0.5, 0.5, 0.5, 1.0)
    with pytest.raises(ValueError):
        step_schedule(2, 0.0, 0, 0.0)
    with pytest.raises(ValueError):
        step_schedule(1, 1.0, 0, 0.0)


def test_bounds_small_k():
    lo, hi = schedule_bounds(2, 1.0, 0)
    assert lo == pytest.approx(2 / 7) and hi == pytest.approx(3.5)
    assert 1.0 >= lo and 1.0 <= hi
    states = [s for _, s in zip(range(100), schedule(2, 1.0))]
    lo, hi = schedule_bounds(2, 1.0, 99)
    assert states[99].beta_k >= 2 / 7 * 100 ** 3.5 == pytest.approx(lo)
    assert states[99].lambda_k <= 3.5 * 100 ** 1.5 == pytest.approx(hi)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_identities_and_alpha_bound(p):
    for s in (s for _, s in zip(range(2000), schedule(p, 0.3))):
        assert s.lambda_k * s.beta_k == pytest.approx(s.eta_k ** 2, rel=1e-12)
        assert s.alpha_k == pytest.approx(s.eta_k / s.beta_k, rel=1e-15)
        assert 0 < s.alpha_k <= 1
        assert 1 / s.alpha_k >= 2 / (3 * p + 1) * (1 + s.k) * (1 - 1e-12)


def test_running_sum_matches_exact_sum():
    from math import fsum
    etas, last = [], None
    for _, s in zip(range(10_001), schedule(2, 0.1)):
        etas.append(s.eta_k)
        last = s
    assert last.beta_k == pytest.approx(fsum(etas), rel=1e-15)


def test_c_p_values():
    assert c_p(2, 1, 1, 0.5) == pytest.approx(6.0, rel=1e-14)
    assert c_p(2, 1, 0, 0.5) == pytest.approx(3.0, rel=1e-14)
    sig = np.linspace(0.05, 0.95, 19)
    vals = [c_p(3, 1.3, 0.4, s) for s in sig]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        c_p(2, 1.0, 2.0, 0.5)


def _c_p_direct(p, M, L, s):
    return p**p * M**p * (1 + 1 / s) / (math.factorial(p) * (p * M - L) ** (p / 2) * (p * M + L) ** (p / 2 - 1))


@given(st.integers(2, 8), st.floats(0.1, 10), st.floats(0, 1), st.floats(0.01, 0.99))
def test_c_p_against_direct_formula(p, M, frac, s):
    L = frac * M
    assert c_p(p, M, L, s) == pytest.approx(_c_p_direct(p, M, L, s), rel=1e-12)


def test_optimal_eta():
    eta = optimal_eta(2, 1, 1, 0.5, 1.0)
    direct = 1.0 / (49 * 6 / (4 * math.sqrt(2)) * math.sqrt(3))
    assert eta == pytest.approx(direct, rel=1e-14)
    assert eta == pytest.approx(0.011110, abs=2e-6)
    for p in (2, 3, 4):
        base = optimal_eta(p, 1.5, 1.0, 0.3, 1.0)
        assert optimal_eta(p, 1.5, 1.0, 0.3, 3.7) == pytest.approx(base / 3.7 ** (p - 1), rel=1e-13)
    assert optimal_eta(2, 1, 1, 1 - 1e-12, 1.0) < 1e-7
    with pytest.raises(ValueError):
        optimal_eta(2, 1, 1, 1.0, 1.0)
    assert total_inner_bound(2, eta, 1, 1, 0.5, 1.0, 100) == pytest.approx(201.0)


def test_d_p_values():
    num = 3 ** 1.5 * 343 * 4 * 3
    den = 16 * math.sqrt(2) * 2 * 3
    assert num == pytest.approx(21387.5, abs=0.2) and den == pytest.approx(135.76, abs=0.01)
    assert d_p(2) == pytest.approx((num / den) ** (2 / 7), rel=1e-14)
    assert d_p(2) == pytest.approx(4.244, abs=1e-3)
    assert all(d_p(p) > 1 for p in range(2, 11))


@pytest.mark.parametrize("p", [2, 3, 4, 5])
def test_d_p_from_iteration_bound_chain(p):
    # K <= ((3p+1) R^2 / (4 eta eps))^(2/(3p+1)) + 1 with eta optimal, M = L, sigma = 1/2
    for L, R in [(1.0, 1.0), (2.0, 3.1), (0.07, 40.0)]:
        eta = optimal_eta(p, L, L, 0.5, R)
        eps = 1e-5
        K_term = ((3 * p + 1) * R**2 / (4 * eta * eps)) ** (2 / (3 * p + 1))
        assert K_term == pytest.approx(d_p(p) * (L * R ** (p + 1) / eps) ** (2 / (3 * p + 1)), rel=1e-12)
        assert oracle_complexity_bound(p, L, R, eps) == pytest.approx(5 * K_term + 7, rel=1e-12)


def test_power_problem_lipschitz_is_two():
    # the complexity bound uses L = 2 for the power problem
    assert PowerProblem(np.zeros(3)).lipschitz_bound() == 2.0
