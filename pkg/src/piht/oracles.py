"""Minibatch function and gradient estimates with variance-adaptive batch sizes.

Batch sizes follow the sample-mean concentration heuristic: to make a
minibatch mean accurate to tolerance ``tau`` with high probability, use
about ``variance / tau**2`` samples. Gradients must be accurate to
``kappa_g * delta`` and function values to ``eps_f * delta**2``, which
gives batches growing like ``delta**-2`` and ``delta**-4`` respectively.
Sizes are capped at ``N``; at the cap the estimate is the exact full-batch
quantity.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "AccuracyParams",
    "SeededSampler",
    "Estimate",
    "pilot_variance",
    "batch_size_for_gradient",
    "batch_size_for_function",
    "estimate_gradient",
    "estimate_function",
]


@dataclass(frozen=True)
class AccuracyParams:
    """Accuracy constants driving the batch-size schedules.

    ``kappa_f`` does not affect batch sizes; it is carried for the
    theory-coupling diagnostics in the solver and the config validator.
    """

    eps_f: float = 0.1
    kappa_g: float = 1.0
    kappa_f: float = 1.0
    pilot_size: int = 32
    min_batch: int = 1

    def __post_init__(self):
        for name in ("eps_f", "kappa_g", "kappa_f"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputError(f"{name} must be positive, got {v}")
        for name in ("pilot_size", "min_batch"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {v}")


class SeededSampler:
    """Reproducible source of without-replacement minibatches.

    One solver run owns one sampler. ``position`` counts the draws made so
    far; two samplers with the same seed that receive the same sequence of
    requests return identical batches.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._rng = np.random.Generator(np.random.PCG64(self.seed))
        self.position = 0

    def draw(self, N, m):
        """Sorted array of ``m`` distinct sample indices out of ``range(N)``."""
        if not 1 <= m <= N:
            raise InvalidInputError(f"cannot draw {m} of {N} samples")
        self.position += 1
        if m == N:
            return np.arange(N, dtype=np.intp)
        return np.sort(self._rng.choice(N, size=m, replace=False)).astype(np.intp)


@dataclass(frozen=True)
class Estimate:
    """A minibatch mean together with the (0-based) samples that produced it."""

    value: object
    batch_size: int
    sample_indices: np.ndarray


def pilot_variance(obj, x, sampler, pilot_size):
    """Sample variances of per-sample values and gradients from a pilot batch.

    Parameters
    ----------
    obj : FiniteSumObjective
    x : ndarray
    sampler : SeededSampler
    pilot_size : int
        Pilot batch size, at most ``obj.n_samples``.

    Returns
    -------
    value_variance : float
        Unbiased variance of ``F(x, i)`` over the pilot.
    gradient_variance : float
        Unbiased total variance ``sum_j Var(dF(x, i)/dx_j)``, i.e. the
        expected squared distance of one sample gradient from the mean.
    """
    N = obj.n_samples
    if not 1 <= pilot_size <= N:
        raise InvalidInputError(f"pilot_size {pilot_size} outside [1, {N}]")
    idx = sampler.draw(N, pilot_size)
    if pilot_size == 1:
        return 0.0, 0.0
    vals = obj.sample_values(x, idx)
    grads = obj.sample_gradients(x, idx)
    value_var = float(np.var(vals, ddof=1))
    grad_var = float(np.sum(np.var(grads, axis=0, ddof=1)))
    return value_var, grad_var


def _schedule(variance, tolerance, params, N):
    if not variance > 0:
        return min(N, params.min_batch)
    tol2 = tolerance * tolerance
    if tol2 == 0.0 or not variance / tol2 < N:
        return N
    ratio = variance / tol2
    if not ratio < N:
        return N
    return min(N, max(params.min_batch, math.ceil(ratio)))


def batch_size_for_gradient(delta, params, gradient_variance, N):
    """``min(N, max(min_batch, ceil(var / (kappa_g * delta)**2)))``."""
    if not delta > 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    return _schedule(gradient_variance, params.kappa_g * delta, params, N)


def batch_size_for_function(delta, params, value_variance, N):
    """``min(N, max(min_batch, ceil(var / (eps_f * delta**2)**2)))``."""
    if not delta > 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    return _schedule(value_variance, params.eps_f * delta * delta, params, N)


def _variances(obj, x, params, sampler, variances):
    if variances is None:
        variances = pilot_variance(obj, x, sampler, min(params.pilot_size, obj.n_samples))
    return variances


def estimate_gradient(obj, x, delta, params, sampler, variances=None):
    """Minibatch-mean gradient sized for ``kappa_g * delta`` accuracy.

    ``variances`` is a ``(value_variance, gradient_variance)`` pair from
    :func:`pilot_variance`; a fresh pilot is drawn when it is omitted.
    """
    _, grad_var = _variances(obj, x, params, sampler, variances)
    m = batch_size_for_gradient(delta, params, grad_var, obj.n_samples)
    idx = sampler.draw(obj.n_samples, m)
    return Estimate(obj.batch_gradient(x, idx), m, idx)


def estimate_function(obj, x, delta, params, sampler, variances=None, sample_indices=None):
    """Minibatch-mean function value sized for ``eps_f * delta**2`` accuracy.

    Passing ``sample_indices`` reuses an earlier batch instead of drawing;
    the solver uses this to evaluate the current and trial points on the
    same samples.
    """
    if sample_indices is None:
        value_var, _ = _variances(obj, x, params, sampler, variances)
        m = batch_size_for_function(delta, params, value_var, obj.n_samples)
        sample_indices = sampler.draw(obj.n_samples, m)
    return Estimate(obj.batch_value(x, sample_indices), len(sample_indices), sample_indices)
