"""Benchmark objectives, data generators, ingestion and verification oracles."""
from .base import FiniteSumObjective, QuadraticObjective
from .data import DatasetMatrix, MatrixParseError, load_matrix_file, write_matrix_file
from .ggm import DIAGONAL_FLOOR, GgmProblem, generate_ggm, ggm_gradient, ggm_value
from .least_squares import LeastSquaresProblem, generate_sparse_ls
from .logistic import LogisticProblem, generate_sparse_logistic
from .verification import brute_force_sparse_minimizer, finite_difference_gradient

__all__ = [
    "FiniteSumObjective",
    "QuadraticObjective",
    "DatasetMatrix",
    "MatrixParseError",
    "load_matrix_file",
    "write_matrix_file",
    "DIAGONAL_FLOOR",
    "GgmProblem",
    "generate_ggm",
    "ggm_value",
    "ggm_gradient",
    "LeastSquaresProblem",
    "generate_sparse_ls",
    "LogisticProblem",
    "generate_sparse_logistic",
    "brute_force_sparse_minimizer",
    "finite_difference_gradient",
]
