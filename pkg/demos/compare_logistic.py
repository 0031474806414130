"""Optimal tensor method against the two baselines on logistic regression.

Run with ``python demos/compare_logistic.py``. Prints, for each method, the
oracle calls needed to reach a few accuracy levels and the late-phase slope
of log(gap) against log(k).
"""
import numpy as np

from optensor import (ProblemSpec, SolverParams, make_problem, lipschitz_bound, reference_solution,
                      optimal_tensor_method, near_optimal_tensor_method, plain_tensor_method)
from optensor.harness import fit_slope

spec = ProblemSpec("logistic", dim=20, seed=1, params={"n_samples": 100})
problem = make_problem(spec)
x0 = np.zeros(problem.dim)

# reference solution gives f* for the gaps and R = ||x0 - x*|| for the step schedule
x_star, f_star = reference_solution(problem, tol=1e-12)
R = float(np.linalg.norm(x0 - x_star))
L = lipschitz_bound(problem)
print(f"d = {problem.dim}, L = {L:.4g}, R = {R:.4g}, f* = {f_star:.12g}")

K = 200
traces = {
    "otm": optimal_tensor_method(problem, x0, SolverParams(M=L, L=L, R=R, K=K), f_star=f_star),
    "near_optimal": near_optimal_tensor_method(problem, x0, SolverParams(M=1.1 * L, L=L, K=K),
                                               f_star=f_star),
    "plain_tensor": plain_tensor_method(problem, x0, M=L, K=K, f_star=f_star),
}

targets = [1e-2, 1e-4, 1e-6, 1e-8]
print(f"\n{'method':<14}" + "".join(f"{t:>10.0e}" for t in targets) + "     slope")
for name, trace in traces.items():
    calls = [trace.calls_to_reach(t) for t in targets]
    try:
        slope = "%.3f" % fit_slope(trace, 20, K, floor=1e-11).slope
    except ValueError:  # converged too fast to leave enough points above the floor
        slope = "n/a"
    print(f"{name:<14}" + "".join(f"{'-' if c is None else c:>10}" for c in calls) + f"{slope:>10}")

# the near-optimal method pays for its adaptivity with a lambda search each iteration
steps = traces["near_optimal"].bisection_steps
print(f"\nnear_optimal: {np.mean(steps):.2f} trials per iteration on average, max {max(steps)}")
otm_T = traces["otm"].T
print(f"otm: {np.mean(otm_T):.2f} inner iterations per outer iteration, max {max(otm_T)}")
