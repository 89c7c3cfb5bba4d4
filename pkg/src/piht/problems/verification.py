"""Independent oracles used to check the solver and the analytic gradients."""
import itertools
import math

import numpy as np

from ..errors import BudgetExceededError, InvalidInputError
from ..sparsity import check_sparsity

MAX_BRUTE_FORCE_DIM = 25
MAX_BRUTE_FORCE_SUPPORTS = 10**6
RIDGE = 1e-12


def finite_difference_gradient(value_fn, x, h=1e-5):
    """Central-difference gradient ``(f(x + h e_i) - f(x - h e_i)) / (2h)``."""
    if not h > 0:
        raise InvalidInputError(f"step h must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (value_fn(xp) - value_fn(xm)) / (2.0 * h)
    return g


def brute_force_sparse_minimizer(problem, K, chunk=4096):
    """Global minimizer of a least-squares problem over all ``K``-sparse vectors.

    Every size-``K`` support is tried; each restricted subproblem is solved
    through its normal equations, with a ``1e-12`` ridge when the Gram block
    is singular. Among equal optimal values the lexicographically smallest
    support wins.

    Parameters
    ----------
    problem : LeastSquaresProblem
    K : int
    chunk : int, optional
        Number of supports solved per batched ``numpy.linalg.solve`` call.

    Returns
    -------
    x_best : ndarray
    support_best : ndarray of int
    value_best : float
        Full-batch objective at ``x_best``, evaluated directly.

    Raises
    ------
    BudgetExceededError
        If ``n > 25`` or there are more than ``10**6`` supports.
    """
    A, b = problem.A, problem.b
    N, n = A.shape
    K = check_sparsity(K, n)
    total = math.comb(n, K)
    if n > MAX_BRUTE_FORCE_DIM or total > MAX_BRUTE_FORCE_SUPPORTS:
        raise BudgetExceededError(
            f"refusing to enumerate C({n}, {K}) = {total} supports "
            f"(limits: n <= {MAX_BRUTE_FORCE_DIM}, {MAX_BRUTE_FORCE_SUPPORTS} supports)")

    G = A.T @ A / N
    c = A.T @ b / N
    bb = float(b @ b) / N
    eye = np.eye(K)

    best_val = math.inf
    best_support = None
    best_coef = None
    combos = itertools.combinations(range(n), K)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        Gs = G[block[:, :, None], block[:, None, :]]
        cs = c[block]
        try:
            coef = np.linalg.solve(Gs, cs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            coef = np.empty_like(cs)
            for t in range(block.shape[0]):
                try:
                    coef[t] = np.linalg.solve(Gs[t], cs[t])
                except np.linalg.LinAlgError:
                    coef[t] = np.linalg.solve(Gs[t] + RIDGE * eye, cs[t])
        # f = 0.5 * (bb - c_S^T coef) at the restricted normal-equation solution
        vals = 0.5 * (bb - np.einsum("ij,ij->i", cs, coef))
        t = int(np.argmin(vals))
        if vals[t] < best_val:
            best_val = float(vals[t])
            best_support = block[t].copy()
            best_coef = coef[t].copy()

    x_best = np.zeros(n)
    x_best[best_support] = best_coef
    return x_best, best_support, problem.value(x_best)
