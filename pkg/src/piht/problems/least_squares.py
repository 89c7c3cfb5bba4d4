import numpy as np

from .. import kernels
from ..errors import InvalidInputError
from .base import FiniteSumObjective


class LeastSquaresProblem(FiniteSumObjective):
    """Least squares ``f(x) = (1/(2N)) ||A x - b||^2``, one sample per row of ``A``."""

    def __init__(self, A, b):
        A = np.ascontiguousarray(A, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise InvalidInputError(f"incompatible shapes A{A.shape}, b{b.shape}")
        self.A = A
        self.b = b
        self.n_samples, self.dim = A.shape

    def sample_values(self, x, idx):
        return kernels.ls_sample_values(self.A, self.b, x, idx)

    def sample_gradients(self, x, idx):
        return kernels.ls_sample_gradients(self.A, self.b, x, idx)

    def batch_value(self, x, idx):
        return float(kernels.ls_batch_value(self.A, self.b, x, idx))

    def batch_gradient(self, x, idx):
        return kernels.ls_batch_gradient(self.A, self.b, x, idx)


def generate_sparse_ls(n, N, k, noise_std=0.0, seed=0):
    """Random sparse regression instance.

    Parameters
    ----------
    n : int
        Number of features.
    N : int
        Number of samples.
    k : int
        Number of nonzeros in the planted solution, ``k <= n``.
    noise_std : float
        Standard deviation of additive Gaussian noise on ``b``.
    seed : int

    Returns
    -------
    problem : LeastSquaresProblem
        Gaussian design ``A`` and ``b = A x* + noise``.
    x_true : ndarray
        Planted solution with ``k`` entries equal to +1 or -1.
    """
    if not (n >= 1 and N >= 1 and 0 <= k <= n):
        raise InvalidInputError(f"invalid dimensions n={n}, N={N}, k={k}")
    if noise_std < 0:
        raise InvalidInputError("noise_std must be nonnegative")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((N, n))
    x_true = np.zeros(n)
    support = np.sort(rng.choice(n, size=k, replace=False))
    x_true[support] = rng.choice([-1.0, 1.0], size=k)
    b = A @ x_true
    if noise_std > 0:
        b = b + noise_std * rng.standard_normal(N)
    return LeastSquaresProblem(A, b), x_true
