"""First-order optimality diagnostics for cardinality-constrained problems.

Terminology follows the sparse optimization literature: for a point ``x``
the *active* set holds the indices where ``x`` is zero and the *inactive*
set the indices where it is nonzero (its support). All functions return
nonnegative residuals that vanish exactly when the corresponding
condition holds; tolerances are left to callers.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InvalidInputError
from .sparsity import as_vector, check_sparsity, kth_largest_magnitude, nnz

__all__ = [
    "UNDEFINED",
    "StationarityReport",
    "active_set",
    "inactive_set",
    "basic_feasibility_residual",
    "l_stationarity_residual",
    "minimal_stationary_L",
    "stationarity_report",
]

#: Sentinel returned by :func:`minimal_stationary_L` when no ``L`` works.
UNDEFINED = math.inf


def active_set(x):
    """Indices where ``x`` is exactly zero."""
    return np.flatnonzero(np.asarray(x) == 0.0)


def inactive_set(x):
    """Indices where ``x`` is nonzero."""
    return np.flatnonzero(np.asarray(x) != 0.0)


def _prepare(x, grad, K):
    x = as_vector(x, "x")
    grad = as_vector(grad, "grad")
    if grad.shape != x.shape:
        raise InvalidInputError(f"grad has dimension {grad.shape[0]}, expected {x.shape[0]}")
    K = check_sparsity(K, x.shape[0])
    if nnz(x) > K:
        raise InfeasibleError(f"x has {nnz(x)} nonzeros, more than K={K}")
    return x, grad, K


def _max_abs(v):
    return float(np.max(np.abs(v))) if v.size else 0.0


def basic_feasibility_residual(x, grad, K):
    """Violation of basic feasibility at ``x``.

    Returns ``max |grad|`` when ``||x||_0 < K`` (the whole gradient must
    vanish) and the largest ``|grad[i]|`` over the support of ``x`` when the
    support is full.
    """
    x, grad, K = _prepare(x, grad, K)
    if nnz(x) < K:
        return _max_abs(grad)
    return _max_abs(grad[x != 0.0])


def l_stationarity_residual(x, grad, K, L):
    """Violation of L-stationarity, measured via its componentwise form.

    The point is L-stationary iff ``grad`` vanishes on the support of ``x``
    and ``|grad[i]| <= L * M_K(x)`` off it, where ``M_K`` is the ``K``-th
    largest magnitude of ``x``. The residual is the largest violation of
    either condition.
    """
    x, grad, K = _prepare(x, grad, K)
    if not L > 0:
        raise InvalidInputError(f"L must be positive, got {L}")
    on = x != 0.0
    bound = L * kth_largest_magnitude(x, K)
    off_violation = _max_abs(grad[~on]) - bound
    return max(off_violation, 0.0, _max_abs(grad[on]))


def minimal_stationary_L(x, grad, K, tol=0.0):
    """Smallest ``L`` for which ``x`` is L-stationary, or :data:`UNDEFINED`.

    Parameters
    ----------
    x, grad : array_like, shape (n,)
    K : int
    tol : float, optional
        Gradient entries on the support with magnitude ``<= tol`` are
        treated as zero. The default demands exact zeros.

    Returns
    -------
    float
        ``max |grad[i]| / M_K(x)`` over the zero set of ``x``; ``0.0`` when
        that gradient block vanishes; :data:`UNDEFINED` (``inf``) if the
        gradient does not vanish on the support or if ``M_K(x) == 0`` while
        the off-support gradient is nonzero.
    """
    x, grad, K = _prepare(x, grad, K)
    on = x != 0.0
    if _max_abs(grad[on]) > tol:
        return UNDEFINED
    g_off = _max_abs(grad[~on])
    if g_off == 0.0:
        return 0.0
    m = kth_largest_magnitude(x, K)
    if m == 0.0:
        return UNDEFINED
    return g_off / m


@dataclass(frozen=True)
class StationarityReport:
    bf_residual: float
    l_residual: float
    L: float
    minimal_L: float
    support_full: bool
    active_set: np.ndarray
    inactive_set: np.ndarray

    def to_dict(self):
        """JSON-friendly view with 1-based index sets."""
        return {
            "bf_residual": self.bf_residual,
            "l_residual": self.l_residual,
            "L": self.L,
            "minimal_L": None if math.isinf(self.minimal_L) else self.minimal_L,
            "support_full": self.support_full,
            "active_set": [int(i) + 1 for i in self.active_set],
            "inactive_set": [int(i) + 1 for i in self.inactive_set],
        }


def stationarity_report(x, grad, K, L=None, tol=0.0):
    """Bundle all diagnostics for one point.

    ``L`` defaults to the minimal stationary ``L`` when that is finite and
    positive, and to 1 otherwise.
    """
    x, grad, K = _prepare(x, grad, K)
    minimal = minimal_stationary_L(x, grad, K, tol=tol)
    if L is None:
        L = minimal if 0.0 < minimal < math.inf else 1.0
    return StationarityReport(
        bf_residual=basic_feasibility_residual(x, grad, K),
        l_residual=l_stationarity_residual(x, grad, K, L),
        L=float(L),
        minimal_L=minimal,
        support_full=nnz(x) == K,
        active_set=active_set(x),
        inactive_set=inactive_set(x),
    )
