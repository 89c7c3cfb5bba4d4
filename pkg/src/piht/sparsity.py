"""Ranking, projection and thresholding primitives for the set of K-sparse vectors.

Indices are 0-based numpy integer arrays. Supports are returned sorted in
ascending order. Whenever several components share a magnitude, the one
with the smaller index ranks first; this makes every operation here a
deterministic function of its inputs.
"""
import numpy as np

from . import kernels
from .errors import InvalidInputError

__all__ = [
    "as_vector",
    "check_sparsity",
    "nnz",
    "magnitude_rank",
    "top_k_support",
    "hard_threshold",
    "pseudo_hard_threshold",
    "kth_largest_magnitude",
    "clipped_step",
    "clip_factor",
]


def as_vector(v, name="v"):
    """Return ``v`` as a finite 1-D float64 array, raising on bad input."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise InvalidInputError(f"{name} has a non-finite component at index {bad}")
    return arr


def check_sparsity(K, n):
    """Validate a sparsity level ``1 <= K <= n`` and return it as ``int``."""
    if isinstance(K, (bool, np.bool_)) or int(K) != K:
        raise InvalidInputError(f"sparsity level must be an integer, got {K!r}")
    K = int(K)
    if not 1 <= K <= n:
        raise InvalidInputError(f"sparsity level K={K} outside [1, {n}]")
    return K


def _check_support(support, n):
    idx = np.asarray(support)
    if idx.ndim != 1:
        raise InvalidInputError("support must be a 1-D index array")
    if idx.size == 0:
        return idx.astype(np.intp)
    if not np.issubdtype(idx.dtype, np.integer):
        raise InvalidInputError(f"support indices must be integers, got dtype {idx.dtype}")
    if idx.min() < 0 or idx.max() >= n:
        raise InvalidInputError(f"support index out of range [0, {n - 1}]")
    if np.unique(idx).size != idx.size:
        raise InvalidInputError("support contains duplicate indices")
    return np.sort(idx).astype(np.intp)


def nnz(x):
    """Number of exactly nonzero components."""
    return int(np.count_nonzero(x))


def magnitude_rank(v):
    """Permutation ordering ``v`` by decreasing absolute value.

    Parameters
    ----------
    v : array_like, shape (n,)
        Finite real vector.

    Returns
    -------
    order : ndarray of int, shape (n,)
        ``order[i]`` is the index of the ``i``-th largest magnitude. Ties are
        broken by ascending index, so ``(-4, 2, 2)`` gives ``[0, 1, 2]``.
    """
    v = as_vector(v)
    return kernels.magnitude_order(v)


def top_k_support(v, K):
    """Indices of the ``K`` largest-magnitude components, sorted ascending."""
    v = as_vector(v)
    K = check_sparsity(K, v.shape[0])
    return kernels.top_k_indices(v, K)


def hard_threshold(v, K):
    """Euclidean projection of ``v`` onto ``{w : ||w||_0 <= K}``.

    Keeps the components on :func:`top_k_support` and zeroes the rest. The
    projection is set-valued under ties; the ascending-index rule picks one
    element, e.g. ``(3, 1, 1)`` with ``K=2`` maps to ``(3, 1, 0)``.
    """
    v = as_vector(v)
    K = check_sparsity(K, v.shape[0])
    out = np.zeros_like(v)
    keep = kernels.top_k_indices(v, K)
    out[keep] = v[keep]
    return out


def pseudo_hard_threshold(v, support):
    """Projection of ``v`` onto the subspace of vectors supported on ``support``."""
    v = as_vector(v)
    idx = _check_support(support, v.shape[0])
    out = np.zeros_like(v)
    out[idx] = v[idx]
    return out


def kth_largest_magnitude(x, K):
    """The ``K``-th largest absolute value among the components of ``x``."""
    x = as_vector(x, "x")
    K = check_sparsity(K, x.shape[0])
    return float(np.abs(x[kernels.magnitude_order(x)[K - 1]]))


def clip_factor(g_norm, alpha, delta):
    """Effective step length ``alpha * min(1, delta / (alpha * ||g||))``.

    Defined as ``alpha`` when ``g_norm == 0``; the resulting step is zero
    either way.
    """
    if g_norm == 0.0 or alpha * g_norm <= delta:
        return alpha
    return delta / g_norm


def clipped_step(x, g, alpha, delta):
    """Gradient step from ``x`` along ``-g`` whose length never exceeds ``delta``.

    Parameters
    ----------
    x, g : array_like, shape (n,)
        Current point and gradient (estimate).
    alpha : float
        Nominal step size, ``> 0``.
    delta : float
        Clipping radius, ``> 0``.

    Returns
    -------
    ndarray, shape (n,)
        ``x - t * g`` with ``t = alpha * min(1, delta / (alpha * ||g||))``.
    """
    x = as_vector(x, "x")
    g = as_vector(g, "g")
    if x.shape != g.shape:
        raise InvalidInputError(f"x and g differ in dimension: {x.shape[0]} vs {g.shape[0]}")
    if not (alpha > 0 and np.isfinite(alpha)):
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    if not (delta > 0 and np.isfinite(delta)):
        raise InvalidInputError(f"delta must be positive, got {delta}")
    t = clip_factor(float(np.linalg.norm(g)), alpha, delta)
    return x - t * g
