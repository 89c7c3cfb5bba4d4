import numpy as np

from .. import kernels
from ..errors import InvalidInputError
from .base import FiniteSumObjective


class LogisticProblem(FiniteSumObjective):
    """Logistic loss ``F(x, i) = log(1 + exp(-y_i a_i^T x))`` with labels in {-1, +1}.

    Values and gradients are evaluated in overflow-safe form, so margins of
    any size are fine.
    """

    def __init__(self, A, y):
        A = np.ascontiguousarray(A, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if A.ndim != 2 or y.shape != (A.shape[0],):
            raise InvalidInputError(f"incompatible shapes A{A.shape}, y{y.shape}")
        if not np.all(np.abs(y) == 1.0):
            raise InvalidInputError("labels must be -1 or +1")
        self.A = A
        self.y = y
        self.n_samples, self.dim = A.shape

    def sample_values(self, x, idx):
        return kernels.logistic_sample_values(self.A, self.y, x, idx)

    def sample_gradients(self, x, idx):
        return kernels.logistic_sample_gradients(self.A, self.y, x, idx)

    def batch_value(self, x, idx):
        return float(kernels.logistic_batch_value(self.A, self.y, x, idx))

    def batch_gradient(self, x, idx):
        return kernels.logistic_batch_gradient(self.A, self.y, x, idx)


def generate_sparse_logistic(n, N, k, seed=0, scale=2.0):
    """Labels drawn from a logistic model with a ``k``-sparse weight vector.

    Returns ``(problem, x_true)``; ``x_true`` has ``k`` entries of
    magnitude ``scale``.
    """
    if not (n >= 1 and N >= 1 and 0 <= k <= n):
        raise InvalidInputError(f"invalid dimensions n={n}, N={N}, k={k}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((N, n))
    x_true = np.zeros(n)
    support = np.sort(rng.choice(n, size=k, replace=False))
    x_true[support] = scale * rng.choice([-1.0, 1.0], size=k)
    prob = 1.0 / (1.0 + np.exp(-(A @ x_true)))
    y = np.where(rng.random(N) < prob, 1.0, -1.0)
    return LogisticProblem(A, y), x_true
