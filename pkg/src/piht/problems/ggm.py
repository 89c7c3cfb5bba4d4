"""Sparse Gaussian graphical model fitting with a pseudo-likelihood objective.

For a symmetric weight matrix ``W`` with positive diagonal and a scaled
data matrix ``X_tilde`` (``N`` samples by ``p`` measures, already divided
by ``sqrt(N)``) the objective is::

    F(W) = sum_i [ -log(w_ii) + ||X_tilde w_i||^2 / w_ii ] + lam2 * ||W||_F^2

where ``w_i`` is the ``i``-th row of ``W``. ``W`` is parameterized by the
vector ``theta = (d, u)``: ``d`` holds the ``p`` diagonal entries, ``u``
the ``p(p-1)/2`` strict upper-triangle entries in row-major order. The
cardinality budget applies to ``u`` only, which is why the diagonal
coordinates are reported as ``free_indices``.
"""
import numpy as np

from .. import kernels
from ..errors import DomainError, InvalidInputError
from .base import FiniteSumObjective

#: Lower bound enforced on the diagonal after each trial step.
DIAGONAL_FLOOR = 1e-8


class GgmProblem(FiniteSumObjective):
    """Pseudo-likelihood GGM objective as a finite sum over samples.

    Sample ``s`` contributes ``sum_i [-log d_i + (w_i^T x_s)^2 / d_i]`` with
    ``x_s = sqrt(N) * X_tilde[s]``; the mean over samples reproduces the
    objective exactly.

    Parameters
    ----------
    X_tilde : array_like, shape (N, p)
        Scaled feature matrix, samples by measures.
    lam2 : float, optional
        Weight of the squared Frobenius penalty. Defaults to 0.
    """

    def __init__(self, X_tilde, lam2=0.0):
        X_tilde = np.asarray(X_tilde, dtype=np.float64)
        if X_tilde.ndim != 2 or X_tilde.shape[1] < 2:
            raise InvalidInputError(f"X_tilde must be N x p with p >= 2, got {X_tilde.shape}")
        if lam2 < 0:
            raise InvalidInputError("lam2 must be nonnegative")
        self.X_tilde = X_tilde
        self.n_samples, self.p = X_tilde.shape
        self.rows = np.ascontiguousarray(np.sqrt(self.n_samples) * X_tilde)
        self.lam2 = float(lam2)
        self.dim = self.p + self.p * (self.p - 1) // 2
        self.free_indices = np.arange(self.p, dtype=np.intp)
        self._iu = np.triu_indices(self.p, 1)

    @classmethod
    def from_samples(cls, X, lam2=0.0, standardize=True):
        """Build from raw samples (rows) by optional standardization and ``1/sqrt(N)`` scaling."""
        X = np.asarray(X, dtype=np.float64)
        if standardize:
            X = X - X.mean(axis=0)
            std = X.std(axis=0)
            X = X / np.where(std > 0, std, 1.0)
        return cls(X / np.sqrt(X.shape[0]), lam2=lam2)

    @property
    def n_offdiag(self):
        return self.dim - self.p

    def encode(self, W):
        """Parameter vector ``(diag(W), triu(W, 1))`` of a symmetric matrix."""
        W = np.asarray(W, dtype=np.float64)
        if W.shape != (self.p, self.p):
            raise InvalidInputError(f"W must be {self.p} x {self.p}")
        if not np.array_equal(W, W.T):
            raise InvalidInputError("W must be symmetric")
        return np.concatenate([np.diag(W).copy(), W[self._iu]])

    def decode(self, theta):
        """Symmetric matrix encoded by ``theta``."""
        theta = self._check(theta, domain=False)
        W = np.zeros((self.p, self.p))
        W[self._iu] = theta[self.p:]
        W = W + W.T
        W[np.diag_indices(self.p)] = theta[:self.p]
        return W

    def identity_params(self, scale=1.0):
        theta = np.zeros(self.dim)
        theta[:self.p] = scale
        return theta

    def _check(self, theta, domain=True):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.dim,):
            raise InvalidInputError(f"expected {self.dim} parameters, got shape {theta.shape}")
        if domain and not np.all(theta[:self.p] > 0):
            bad = int(np.flatnonzero(~(theta[:self.p] > 0))[0])
            raise DomainError(f"diagonal entry {bad} is {theta[bad]}, must be positive")
        return theta

    def _penalty(self, theta):
        if self.lam2 == 0.0:
            return 0.0
        d, u = theta[:self.p], theta[self.p:]
        return self.lam2 * (float(d @ d) + 2.0 * float(u @ u))

    def _penalty_gradient(self, theta):
        g = np.empty_like(theta)
        g[:self.p] = 2.0 * self.lam2 * theta[:self.p]
        g[self.p:] = 4.0 * self.lam2 * theta[self.p:]
        return g

    def sample_values(self, x, idx):
        x = self._check(x)
        return kernels.ggm_sample_values(self.rows, x, idx) + self._penalty(x)

    def sample_gradients(self, x, idx):
        x = self._check(x)
        out = kernels.ggm_sample_gradients(self.rows, x, idx)
        if self.lam2:
            out = out + self._penalty_gradient(x)
        return out

    def batch_value(self, x, idx):
        x = self._check(x)
        return float(kernels.ggm_batch_value(self.rows, x, idx)) + self._penalty(x)

    def batch_gradient(self, x, idx):
        x = self._check(x)
        g = kernels.ggm_batch_gradient(self.rows, x, idx)
        if self.lam2:
            g = g + self._penalty_gradient(x)
        return g

    def repair(self, x):
        """Floor the diagonal at :data:`DIAGONAL_FLOOR` so ``log`` stays defined."""
        d = x[:self.p]
        if np.all(d >= DIAGONAL_FLOOR):
            return x
        x = x.copy()
        x[:self.p] = np.maximum(d, DIAGONAL_FLOOR)
        return x

    def random_feasible_point(self, K, rng):
        """Identity diagonal plus ``K`` small random off-diagonal entries."""
        theta = self.identity_params()
        pos = rng.choice(self.n_offdiag, size=min(K, self.n_offdiag), replace=False)
        theta[self.p + pos] = 0.1 * rng.standard_normal(pos.size)
        return theta


def ggm_value(problem, params):
    """Objective value at ``params``; raises :class:`DomainError` off the domain."""
    return problem.value(params)


def ggm_gradient(problem, params):
    """Analytic gradient with respect to the ``(d, u)`` parameterization."""
    return problem.gradient(params)


def generate_ggm(p, N, n_edges, seed=0, margin=0.05, n_blocks=1):
    """Samples from a Gaussian with a planted sparse precision matrix.

    The nodes are split at random into ``n_blocks`` groups of near-equal
    size. Each group gets a random spanning tree; extra random within-group
    edges are then added until there are ``n_edges`` in total. Edge signs
    are random. Each diagonal block of the precision matrix is
    ``t * I - M_b`` for the signed adjacency ``M_b``, with ``t`` chosen so
    that the block's smallest eigenvalue equals ``margin * t``. A small
    margin gives strong partial correlations.

    Returns
    -------
    problem : GgmProblem
        Built from the standardized samples.
    precision : ndarray, shape (p, p)
        The planted precision matrix.
    """
    if not (p >= 2 and N >= 2 and 1 <= n_blocks <= p // 2):
        raise InvalidInputError(f"invalid GGM dimensions p={p}, N={N}, n_blocks={n_blocks}")
    if not 0 < margin < 1:
        raise InvalidInputError(f"margin must lie in (0, 1), got {margin}")
    rng = np.random.default_rng(seed)
    blocks = np.array_split(rng.permutation(p), n_blocks)
    max_edges = sum(len(b) * (len(b) - 1) // 2 for b in blocks)
    if not p - n_blocks <= n_edges <= max_edges:
        raise InvalidInputError(
            f"n_edges={n_edges} outside [{p - n_blocks}, {max_edges}] for {n_blocks} blocks")
    edges = set()
    for block in blocks:
        for t in range(1, len(block)):
            i, j = block[t], block[rng.integers(t)]
            edges.add((min(i, j), max(i, j)))
    while len(edges) < n_edges:
        block = blocks[rng.integers(n_blocks)]
        i, j = rng.choice(block, size=2, replace=False)
        edges.add((min(i, j), max(i, j)))
    M = np.zeros((p, p))
    for (i, j) in sorted(edges):
        M[i, j] = M[j, i] = rng.choice([-1.0, 1.0])
    precision = np.zeros((p, p))
    for block in blocks:
        Mb = M[np.ix_(block, block)]
        t = float(np.linalg.eigvalsh(Mb)[-1]) / (1.0 - margin)
        precision[np.ix_(block, block)] = t * np.eye(len(block)) - Mb
    cov = np.linalg.inv(precision)
    X = rng.multivariate_normal(np.zeros(p), cov, size=N, method="cholesky")
    return GgmProblem.from_samples(X), precision
