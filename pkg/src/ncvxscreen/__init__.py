"""Lasso with non-convex penalties, solved by majorization-minimization with
duality-gap safe screening."""

from .baselines import GistConfig, prox_penalty, solve_gist, solve_ncvxcd
from .bench import PathConfig, PathResult, emit_results, lambda_grid, run_path
from .data import ToyConfig, generate_toy, load_dense_csv, load_libsvm
from .errors import ConvergenceError
from .mm import MmConfig, solve_mm
from .penalties import Penalty, kkt_residual, lambda_max, objective
from .problem import Problem
from .pwl import PwlSpec, solve_pwl

__all__ = [
    "ConvergenceError", "GistConfig", "MmConfig", "PathConfig", "PathResult",
    "Penalty", "Problem", "PwlSpec", "ToyConfig", "emit_results", "generate_toy",
    "kkt_residual", "lambda_grid", "lambda_max", "load_dense_csv", "load_libsvm",
    "objective", "prox_penalty", "run_path", "solve_gist", "solve_mm",
    "solve_ncvxcd", "solve_pwl",
]
__version__ = "0.1.0"
