import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optensor.errors import UnsupportedOrderError
from optensor.model import (AuxFunction, TaylorModel, aux_gradient, aux_minimizer, aux_taylor,
                           aux_value, regularized_model_value, taylor_gradient, taylor_model,
                           taylor_value)
from optensor.oracle import CountedOracle, ProblemSpec, QuadraticProblem, make_problem


def test_taylor_model_exact_at_center(small_problem):
    z = np.linspace(-0.5, 0.5, small_problem.dim)
    m = taylor_model(CountedOracle(small_problem), z)
    assert taylor_value(m, z) == small_problem.value(z)
    np.testing.assert_array_equal(taylor_gradient(m, z), small_problem.gradient(z))
    assert regularized_model_value(m, z, 1.0) == small_problem.value(z)


def test_quadratic_equals_its_taylor_model():
    pb = make_problem(ProblemSpec("quadratic", 5, 1))
    rng = np.random.default_rng(0)
    m = taylor_model(CountedOracle(pb), rng.standard_normal(5))
    for _ in range(20):
        x = rng.standard_normal(5) * 5
        assert taylor_value(m, x) == pytest.approx(pb.value(x), rel=1e-12, abs=1e-12)
    # unit displacement adds exactly M/3
    x = m.center + np.eye(5)[0]
    assert regularized_model_value(m, x, 0.3) == pytest.approx(pb.value(x) + 0.1, rel=1e-12)


def test_logistic_taylor_error_is_cubic():
    pb = make_problem(ProblemSpec("logistic", 10, 2, {"n_samples": 50}))
    L = pb.lipschitz_bound()
    m = taylor_model(CountedOracle(pb), np.zeros(10))
    rng = np.random.default_rng(3)
    for _ in range(100):
        h = rng.standard_normal(10)
        h *= rng.uniform(1e-3, 1.0) / np.linalg.norm(h)
        err = abs(pb.value(h) - taylor_value(m, h))
        assert err <= L / 6 * np.linalg.norm(h) ** 3 + 1e-15


def test_regularized_model_is_upper_bound(small_problem):
    M = small_problem.lipschitz_bound() + 0.1
    rng = np.random.default_rng(4)
    oracle = CountedOracle(small_problem)
    for _ in range(100):
        z = rng.standard_normal(small_problem.dim) * 2
        d = rng.standard_normal(small_problem.dim)
        x = z + d * rng.uniform(0, 10) / np.linalg.norm(d)
        m = taylor_model(oracle, z)
        fx = small_problem.value(x)
        assert regularized_model_value(m, x, M) >= fx - 1e-10 * (1 + abs(fx))


def test_model_argument_checks():
    pb = make_problem(ProblemSpec("power", 2))
    m = taylor_model(CountedOracle(pb), np.ones(2))
    with pytest.raises(ValueError):
        regularized_model_value(m, np.zeros(2), 0.0)
    m3 = TaylorModel(m.center, m.base, order=3)
    with pytest.raises(UnsupportedOrderError):
        taylor_value(m3, np.zeros(2))
    with pytest.raises(ValueError):
        AuxFunction(CountedOracle(pb), 0.0, np.zeros(2))


def test_aux_hand_example_and_accounting():
    oracle = CountedOracle(QuadraticProblem(np.eye(2), np.zeros(2)))
    aux = AuxFunction(oracle, 1.0, np.zeros(2))
    assert aux_value(aux, [2.0, 0.0]) == 4.0
    np.testing.assert_array_equal(aux_gradient(aux, [2.0, 0.0]), [4.0, 0.0])
    assert oracle.calls == 2
    aux_taylor(aux, [1.0, 1.0])
    assert oracle.calls == 3


def test_aux_at_anchor_and_taylor_data(small_problem):
    rng = np.random.default_rng(5)
    z = rng.standard_normal(small_problem.dim)
    aux = AuxFunction(CountedOracle(small_problem), 0.7, z)
    assert aux_value(aux, z) == small_problem.value(z)
    np.testing.assert_array_equal(aux_gradient(aux, z), small_problem.gradient(z))
    m = aux_taylor(aux, z)
    np.testing.assert_array_equal(m.gradient, small_problem.gradient(z))
    c = z + 1.0
    m = aux_taylor(aux, c)
    np.testing.assert_allclose(m.hessian, small_problem.evaluate(c).hessian + np.eye(small_problem.dim) / 0.7)
    big = aux_taylor(AuxFunction(CountedOracle(small_problem), 1e8, z), c)
    assert np.max(np.abs(big.hessian - small_problem.evaluate(c).hessian)) <= 1e-8 + 1e-15


def test_aux_quadratic_hessian_exact():
    pb = make_problem(ProblemSpec("quadratic", 4, 6))
    m = aux_taylor(AuxFunction(CountedOracle(pb), 2.0, np.zeros(4)), np.ones(4))
    np.testing.assert_array_equal(m.hessian, pb.Q + np.eye(4) / 2.0)


def test_aux_strong_convexity_and_fd_gradient(small_problem):
    rng = np.random.default_rng(6)
    lam = 0.3
    aux = AuxFunction(CountedOracle(small_problem), lam, rng.standard_normal(small_problem.dim))
    for _ in range(30):
        x, y = rng.standard_normal(small_problem.dim), rng.standard_normal(small_problem.dim)
        lhs = (aux.gradient(x) - aux.gradient(y)) @ (x - y)
        assert lhs >= np.sum((x - y) ** 2) / lam * (1 - 1e-12)
        h = 1e-5 * (1 + np.linalg.norm(x))
        fd = np.array([(aux.value(x + h * e) - aux.value(x - h * e)) / (2 * h)
                       for e in np.eye(small_problem.dim)])
        g = aux.gradient(x)
        assert np.linalg.norm(fd - g) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_aux_hessian_lipschitz_matches_problem():
    pb = make_problem(ProblemSpec("power", 4, 2))
    aux = AuxFunction(CountedOracle(pb), 0.5, np.zeros(4))
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        x, y = rng.standard_normal(4), rng.standard_normal(4)
        q = np.linalg.norm(aux_taylor(aux, x).hessian - aux_taylor(aux, y).hessian, 2)
        worst = max(worst, q / np.linalg.norm(x - y))
    assert worst <= pb.lipschitz_bound() * (1 + 1e-12)


@given(st.floats(0.01, 100.0), st.integers(0, 50))
def test_aux_minimizer_stationary(lam, seed):
    pb = make_problem(ProblemSpec("logistic", 4, seed, {"n_samples": 12}))
    z = np.random.default_rng(seed).standard_normal(4)
    x = aux_minimizer(pb, lam, z)
    g = pb.gradient(x) + (x - z) / lam
    assert np.linalg.norm(g) <= 1e-11 * (1 + np.linalg.norm(z) / lam)
