"""Optimal and near-optimal second-order tensor methods for smooth convex minimization."""
from .errors import (BisectionError, ConfigError, InnerLoopError, OptensorError, OracleError,
                     SolverError, SubsolverError, UnsupportedOrderError)
from .inner import tensor_extragradient, theoretical_T_bound
from .model import AuxFunction, TaylorModel, aux_minimizer, taylor_model
from .oracle import (CountedOracle, OracleResponse, ProblemSpec, lipschitz_bound, make_problem,
                     reference_solution)
from .outer import (RunTrace, SolverParams, inner_minimizers, near_optimal_tensor_method,
                    optimal_tensor_method, plain_tensor_method, potential_check)
from .schedule import c_p, d_p, oracle_complexity_bound, optimal_eta, schedule, step_schedule
from .subsolver import CubicModel, solve_cubic

__all__ = [
    "BisectionError", "ConfigError", "InnerLoopError", "OptensorError", "OracleError",
    "SolverError", "SubsolverError", "UnsupportedOrderError", "tensor_extragradient",
    "theoretical_T_bound", "AuxFunction", "TaylorModel", "aux_minimizer", "taylor_model",
    "CountedOracle", "OracleResponse", "ProblemSpec", "lipschitz_bound", "make_problem",
    "reference_solution", "RunTrace", "SolverParams", "inner_minimizers",
    "near_optimal_tensor_method", "optimal_tensor_method", "plain_tensor_method",
    "potential_check", "c_p", "d_p", "oracle_complexity_bound", "optimal_eta", "schedule",
    "step_schedule", "CubicModel", "solve_cubic",
]
