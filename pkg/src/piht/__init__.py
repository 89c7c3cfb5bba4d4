"""Probabilistic Iterative Hard Thresholding for cardinality-constrained finite sums."""
from .kernels import BACKEND
from .oracles import AccuracyParams, SeededSampler
from .solver import SolverConfig, SolverResult, piht_run
from .sparsity import hard_threshold, pseudo_hard_threshold, top_k_support

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AccuracyParams",
    "SeededSampler",
    "SolverConfig",
    "SolverResult",
    "piht_run",
    "hard_threshold",
    "pseudo_hard_threshold",
    "top_k_support",
]
