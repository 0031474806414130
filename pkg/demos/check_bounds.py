"""Worst-case guarantees of the optimal tensor method, checked numerically.

Run with ``python demos/check_bounds.py``. On the separable power function
f(x) = ||x - c||^3 / 3 (Hessian Lipschitz constant 2) the method must reach
accuracy eps within the closed-form oracle bound, and with the optimal step
parameter every inner loop should stop after very few iterations.
"""
import numpy as np

from optensor import (ProblemSpec, SolverParams, make_problem, reference_solution,
                      optimal_tensor_method, optimal_eta, oracle_complexity_bound, d_p, c_p)
from optensor.schedule import schedule_bounds, step_schedule

print(f"C_2(M=1, L=1, sigma=1/2) = {c_p(2, 1.0, 1.0, 0.5):g}")
print(f"D_2 = {d_p(2):.5f}")

# beta_k stays above and lambda_k below their polynomial envelopes
eta = optimal_eta(2, 1.0, 1.0, 0.5, 1.0)
beta, carry = 0.0, 0.0
for k in range(1, 101):
    st = step_schedule(2, eta, k, beta, carry)
    beta, carry = st.beta_k, st.carry
    if k in (1, 10, 100):
        beta_lo, lam_hi = schedule_bounds(2, eta, k)
        print(f"k = {k:>3}: beta = {beta:.4g} >= {beta_lo:.4g}, lambda = {st.lambda_k:.4g} <= {lam_hi:.4g}")

problem = make_problem(ProblemSpec("power", dim=10, seed=0))
x0 = np.zeros(problem.dim)
x_star, f_star = reference_solution(problem)
R = float(np.linalg.norm(x0 - x_star))
L = 2.0

print(f"\npower function, d = 10, R = {R:.4g}")
print(f"{'eps':>8} {'calls':>7} {'bound':>9}")
for eps in (1e-2, 1e-4, 1e-6, 1e-8):
    bound = oracle_complexity_bound(2, L, R, eps)
    trace = optimal_tensor_method(problem, x0, SolverParams(M=L, L=L, R=R, K=int(bound)),
                                  f_star=f_star)
    calls = trace.calls_to_reach(eps, paper_accounting=True)
    print(f"{eps:>8.0e} {calls:>7} {bound:>9.0f}")
    assert calls is not None and calls <= bound

print(f"\ninner iterations per outer step: max {max(trace.T)}, total {sum(trace.T)} over {trace.K}")
