"""Finite-sum objective interface shared by all benchmark problems."""
import numpy as np

from ..errors import InvalidInputError


class FiniteSumObjective:
    """Objective of the form ``f(x) = (1/N) * sum_i F(x, i)``.

    Subclasses implement :meth:`sample_values` and :meth:`sample_gradients`
    and usually override the batch methods with fused kernels. Sample
    index arrays passed to the batch methods must be sorted ascending;
    every reduction then runs in a fixed order.

    Attributes
    ----------
    n_samples : int
        Number of samples ``N``.
    dim : int
        Dimension of the decision vector.
    free_indices : ndarray of int
        Coordinates excluded from the cardinality budget. They are always
        kept by the thresholding step. Empty for plain sparse problems.
    """

    n_samples = 0
    dim = 0
    free_indices = np.empty(0, dtype=np.intp)

    def sample_values(self, x, idx):
        raise NotImplementedError

    def sample_gradients(self, x, idx):
        raise NotImplementedError

    def batch_value(self, x, idx):
        return float(np.add.reduce(self.sample_values(x, idx)) / len(idx))

    def batch_gradient(self, x, idx):
        return np.add.reduce(self.sample_gradients(x, idx), axis=0) / len(idx)

    @property
    def all_indices(self):
        return np.arange(self.n_samples, dtype=np.intp)

    def value(self, x):
        """Full-batch objective value."""
        return self.batch_value(np.asarray(x, dtype=np.float64), self.all_indices)

    def gradient(self, x):
        """Full-batch gradient."""
        return self.batch_gradient(np.asarray(x, dtype=np.float64), self.all_indices)

    def _check_sample(self, i):
        if not 0 <= i < self.n_samples:
            raise InvalidInputError(f"sample index {i} outside [0, {self.n_samples - 1}]")
        return np.array([i], dtype=np.intp)

    def sample_value(self, x, i):
        """Value of the single term ``F(x, i)``."""
        idx = self._check_sample(i)
        return float(self.sample_values(np.asarray(x, dtype=np.float64), idx)[0])

    def sample_gradient(self, x, i):
        """Gradient of the single term ``F(x, i)``."""
        idx = self._check_sample(i)
        return self.sample_gradients(np.asarray(x, dtype=np.float64), idx)[0]

    def repair(self, x):
        """Map a trial point back into the objective's domain. Identity by default."""
        return x


class QuadraticObjective(FiniteSumObjective):
    """``f(x) = 0.5 * ||x - c||^2`` as a one-sample finite sum."""

    n_samples = 1

    def __init__(self, center):
        self.center = np.asarray(center, dtype=np.float64)
        self.dim = self.center.shape[0]

    def sample_values(self, x, idx):
        r = x - self.center
        return np.full(len(idx), 0.5 * float(r @ r))

    def sample_gradients(self, x, idx):
        return np.tile(x - self.center, (len(idx), 1))

    def batch_value(self, x, idx):
        r = x - self.center
        return 0.5 * float(r @ r)

    def batch_gradient(self, x, idx):
        return x - self.center
