import math

import numpy as np
import pytest

from optensor.errors import BisectionError, ConfigError
from optensor.harness.slopes import fit_slope
from optensor.harness.verify import search_interval_margins
from optensor.oracle import ProblemSpec, make_problem, reference_solution
from optensor.outer import (CSV_COLUMNS, SolverParams, inner_minimizers, ms_condition_residuals,
                           near_optimal_tensor_method, optimal_tensor_method, plain_tensor_method,
                           potential_check)
from optensor.schedule import total_inner_bound

LOGISTIC = ProblemSpec("logistic", 20, 1, {"n_samples": 100})


def _setup(spec, M=None, **kw):
    pb = make_problem(spec)
    x_star, f_star = reference_solution(pb)
    L = pb.lipschitz_bound()
    R = float(np.linalg.norm(x_star))
    params = SolverParams(M=M if M is not None else max(L, 1.0 if L == 0 else L), L=L, R=R, **kw)
    return pb, x_star, f_star, params


def test_start_at_minimizer_stays_there():
    pb = make_problem(ProblemSpec("quadratic", 2, 3))
    x_star = pb.minimizer()
    f_star = pb.value(x_star)
    tr = optimal_tensor_method(pb, x_star, SolverParams(M=1.0, K=10, eta=1.0), f_star)
    assert np.all(np.abs(tr.gaps) <= 1e-11)  # f* accuracy floor
    assert all(T == 1 for T in tr.T)


def test_logistic_otm_rate_and_budget():
    pb, _, f_star, params = _setup(LOGISTIC, K=200, keep_iterates=False)
    tr = optimal_tensor_method(pb, np.zeros(20), params, f_star)
    assert sum(tr.T) <= 2 * 200 + 1
    assert fit_slope(tr, 20, 200, 1e-11).slope <= -3.3
    running_min = np.minimum.accumulate(tr.gaps)
    assert np.all(np.diff(running_min) <= 0)
    assert np.all(tr.gaps >= -1e-11)


def test_otm_trace_identities():
    pb, _, f_star, params = _setup(ProblemSpec("logsumexp", 6, 2), K=30, eta=0.05)
    tr = optimal_tensor_method(pb, np.ones(6), params, f_star)
    for k, r in enumerate(tr.records):
        assert tr.x_g[k] == pytest.approx(r.alpha_k * tr.x[k] + (1 - r.alpha_k) * tr.x_f[k], abs=0)
        np.testing.assert_array_equal(tr.x[k + 1], tr.x[k] - r.eta_k * pb.gradient(tr.x_f[k + 1]))
        assert r.lambda_k * r.beta_k == pytest.approx(r.eta_k ** 2, rel=1e-12)
        assert r.alpha_k == pytest.approx(r.eta_k / r.beta_k, rel=1e-15)
    calls = tr.column("oracle_calls_cum")
    assert np.all(np.diff(calls) > 0)
    assert tr.records[-1].oracle_calls_cum == 2 * sum(tr.T)
    assert tr.records[-1].oracle_calls_paper_accounting_cum == sum(1 + 2 * T for T in tr.T)
    for lhs, rhs, floor in ms_condition_residuals(pb, tr):
        assert lhs <= rhs * (1 + 1e-10) + floor


@pytest.mark.parametrize("eta_scale", [1.0, 10.0, 300.0])
def test_total_inner_iterations_bound(eta_scale):
    pb, _, f_star, params = _setup(ProblemSpec("power", 5, 1), K=60)
    from optensor.schedule import optimal_eta
    params.eta = eta_scale * optimal_eta(2, params.M, params.L, params.sigma, params.R)
    tr = optimal_tensor_method(pb, np.zeros(5), params, f_star)
    bound = total_inner_bound(2, params.eta, params.M, params.L, params.sigma, params.R, 60)
    assert sum(tr.T) <= bound


def test_otm_param_errors():
    pb = make_problem(ProblemSpec("power", 3))
    with pytest.raises(ConfigError):
        optimal_tensor_method(pb, np.zeros(3), SolverParams(M=1.0, L=2.0, K=5, eta=1.0))
    with pytest.raises(ConfigError):
        optimal_tensor_method(pb, np.zeros(3), SolverParams(M=2.0, K=5))
    with pytest.raises(ConfigError):
        optimal_tensor_method(pb, np.zeros(3), SolverParams(M=2.0, K=5, eta=1.0, sigma=1.0))
    with pytest.raises(ConfigError):
        optimal_tensor_method(pb, np.zeros(3), SolverParams(M=2.0, K=5, eta=1.0, p=3))


def test_near_optimal_search_interval_and_inexactness():
    pb, _, f_star, params = _setup(LOGISTIC, K=120, keep_iterates=False)
    params.M = 1.1 * params.L
    tr = near_optimal_tensor_method(pb, np.zeros(20), params, f_star)
    (lo, lo_b), (hi, hi_b), q = search_interval_margins(tr, params.M, params.L, params.sigma)
    assert lo >= lo_b and hi <= hi_b
    assert len(tr.bisection_steps) == 120 and min(tr.bisection_steps) >= 1
    for lhs, rhs, floor in ms_condition_residuals(pb, tr):
        assert lhs <= rhs * (1 + 1e-10) + floor
    # the extra call per iteration is the gradient at the accepted point
    assert tr.metadata["oracle_calls"] == sum(tr.bisection_steps) + 120


def test_near_optimal_on_quadratic_matches_accelerated_rate():
    pb = make_problem(ProblemSpec("quadratic", 10, 0, {"mu": 1e-3}))
    x_star = pb.minimizer()
    f_star = pb.value(x_star)
    tr = near_optimal_tensor_method(pb, np.zeros(10), SolverParams(M=1.0, L=0.0, K=200), f_star)
    assert fit_slope(tr, 20, 200, 1e-11).slope <= -3.3


def test_near_optimal_bisection_cap():
    pb, _, f_star, params = _setup(LOGISTIC, K=20)
    params.M = 1.1 * params.L
    params.bisection_max_steps = 0
    with pytest.raises(BisectionError):
        near_optimal_tensor_method(pb, np.zeros(20), params, f_star)


def test_plain_newton_limit_and_descent():
    pb = make_problem(ProblemSpec("quadratic", 5, 2))
    x0 = np.ones(5)
    tr = plain_tensor_method(pb, x0, 1e-12, 1)
    np.testing.assert_allclose(tr.x_f[1], x0 - np.linalg.solve(pb.Q, pb.gradient(x0)), atol=1e-8)
    lg = make_problem(LOGISTIC)
    x_star, f_star = reference_solution(lg)
    tr = plain_tensor_method(lg, np.zeros(20), lg.lipschitz_bound(), 200, f_star)
    vals = tr.column("value")
    assert np.all(np.diff(vals) <= 1e-15 * (1 + np.abs(vals[1:])))
    assert fit_slope(tr, 20, 200, 1e-11).slope <= -1.8


def test_potential_trivial_start():
    pb = make_problem(ProblemSpec("quadratic", 4, 1))
    x_star = pb.minimizer()
    tr = optimal_tensor_method(pb, x_star, SolverParams(M=1.0, K=1, eta=1.0), pb.value(x_star))
    rep = potential_check(tr, inner_minimizers(pb, tr), 0.0, 0.5, pb.value(x_star), 1e-11)
    assert rep.passed
    assert abs(rep.weak_lhs[0]) <= 1e-10 and abs(rep.strong_lhs[0]) <= 1e-10


def test_potential_quadratic_all_prefixes():
    pb = make_problem(ProblemSpec("quadratic", 10, 0, {"mu": 0.1}))
    x_star = pb.minimizer()
    f_star = pb.value(x_star)
    R = float(np.linalg.norm(x_star))
    tr = optimal_tensor_method(pb, np.zeros(10), SolverParams(M=1.0, L=0.0, R=R, K=200), f_star)
    rep = potential_check(tr, inner_minimizers(pb, tr), R, 0.5, f_star, 1e-11)
    assert rep.weak_ok and rep.strong_ok
    assert len(rep.weak_lhs) == 200
    with pytest.raises(ValueError):
        potential_check(tr, inner_minimizers(pb, tr)[:-1], R, 0.5, f_star)
    tr.metadata["f_star"] = None
    with pytest.raises(ValueError):
        potential_check(tr, inner_minimizers(pb, tr), R, 0.5)


def test_rows_follow_column_order():
    pb = make_problem(ProblemSpec("power", 3))
    tr = plain_tensor_method(pb, np.ones(3), 2.0, 3, 0.0)
    assert tuple(tr.rows()[0]) == CSV_COLUMNS
    assert tr.calls_to_reach(math.inf) == 1
    assert tr.calls_to_reach(-1.0) is None
