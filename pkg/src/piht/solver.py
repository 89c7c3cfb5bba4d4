"""Probabilistic Iterative Hard Thresholding.

Each iteration takes a gradient estimate ``g`` at the current point ``x``,
makes a gradient step whose length is clipped to the trust parameter
``delta``, keeps the ``K`` largest components of the result (plus any
coordinates the objective exempts from the budget) and zeroes the rest.
The trial point is accepted when the estimated decrease is a large enough
fraction of ``||g_I|| * delta``; ``delta`` then grows by ``gamma`` (capped
at ``delta_max``), otherwise it shrinks by ``gamma`` and ``x`` is kept.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import kernels
from .errors import InvalidInputError, SolverAbort
from .oracles import (
    AccuracyParams,
    SeededSampler,
    estimate_function,
    estimate_gradient,
    pilot_variance,
)
from .sparsity import as_vector, clip_factor, pseudo_hard_threshold
from .stationarity import UNDEFINED, minimal_stationary_L, stationarity_report

logger = logging.getLogger(__name__)

STOCHASTIC = "stochastic"
FULL_BATCH = "full-batch"

STOP_MAX_ITERATIONS = "max-iterations"
STOP_DELTA_FLOOR = "delta-floor"
STOP_STATIONARY = "stationarity-reached"

#: Slack allowed in the runtime descent-inequality check.
DESCENT_SLACK = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of a PIHT run.

    ``gamma`` must exceed 1: ``delta`` is multiplied by it on success and
    divided by it on failure.
    """

    K: int
    alpha: float = 1.0
    eta1: float = 1e-4
    eta2: float = 1e-4
    gamma: float = 2.0
    delta0: float = 1.0
    delta_max: float = 10.0
    max_iterations: int = 1000
    seed: int = 0
    stationarity_tol: float = 1e-6
    delta_stop: float = 1e-12
    accuracy: AccuracyParams = field(default_factory=AccuracyParams)
    mode: str = STOCHASTIC

    def __post_init__(self):
        for message in self.violations():
            raise InvalidInputError(message)

    def violations(self):
        """Human-readable list of violated parameter constraints."""
        out = []
        if isinstance(self.K, bool) or int(self.K) != self.K or self.K < 1:
            out.append(f"K must be a positive integer, got {self.K}")
        for name in ("alpha", "eta1", "eta2", "delta0", "delta_max", "stationarity_tol", "delta_stop"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                out.append(f"{name} must be positive and finite, got {v}")
        if not self.gamma > 1:
            out.append(f"gamma must be > 1 (delta grows by gamma on success), got {self.gamma}")
        if self.delta0 > self.delta_max:
            out.append(f"delta0={self.delta0} exceeds delta_max={self.delta_max}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            out.append(f"max_iterations must be a nonnegative integer, got {self.max_iterations}")
        if self.mode not in (STOCHASTIC, FULL_BATCH):
            out.append(f"mode must be '{STOCHASTIC}' or '{FULL_BATCH}', got {self.mode!r}")
        return out

    def theory_notices(self):
        """Parameter couplings assumed by the convergence theory that this config violates.

        These are informational; the solver runs regardless.
        """
        acc = self.accuracy
        out = []
        if self.eta2 < 3 * acc.kappa_f * self.alpha:
            out.append(f"eta2={self.eta2:g} < 3*kappa_f*alpha={3 * acc.kappa_f * self.alpha:g}")
        bound = min(acc.kappa_f, self.eta1 * self.eta2)
        if acc.eps_f > bound:
            out.append(f"eps_f={acc.eps_f:g} > min(kappa_f, eta1*eta2)={bound:g}")
        alpha_min = math.sqrt(self.K) / (acc.kappa_f * self.delta_max)
        if not self.alpha > alpha_min:
            out.append(f"alpha={self.alpha:g} <= sqrt(K)/(kappa_f*delta_max)={alpha_min:g}")
        return out


@dataclass(frozen=True)
class IterationRecord:
    """Quantities computed in one iteration.

    ``rho`` is NaN when the restricted gradient norm is zero.
    ``descent_gap`` is ``g^T s + ||s||^2 / alpha`` for the thresholded step
    ``s``; the model decrease inequality holds when it is ``<= 0``.
    """

    k: int
    delta: float
    accepted: bool
    rho: float
    restricted_grad_norm: float
    f0_estimate: float
    fs_estimate: float
    grad_batch: int
    value_batch: int
    support: np.ndarray
    step_norm: float
    descent_gap: float


@dataclass
class SolverResult:
    final_point: np.ndarray
    trace: List[IterationRecord]
    stop_reason: str
    delta_square_sum: float
    final_delta: float
    warnings: List[str] = field(default_factory=list)

    @property
    def accepted_count(self):
        return sum(r.accepted for r in self.trace)

    @property
    def descent_violations(self):
        return [r.k for r in self.trace if r.descent_gap > DESCENT_SLACK]


def acceptance_test(f0, fs, restricted_grad_norm, delta, eta1, eta2):
    """Sufficient-decrease test on the estimated objective reduction.

    Accepts iff ``(f0 - fs) / (||g_I|| * delta) >= eta1`` and
    ``||g_I|| >= eta2 * delta``. A zero restricted gradient always rejects.
    """
    if not restricted_grad_norm > 0:
        return False
    rho = (f0 - fs) / (restricted_grad_norm * delta)
    return bool(rho >= eta1 and restricted_grad_norm >= eta2 * delta)


def update_delta(delta, accepted, gamma, delta_max):
    """``min(gamma * delta, delta_max)`` after success, ``delta / gamma`` after failure."""
    if accepted:
        return min(gamma * delta, delta_max)
    return delta / gamma


def constrained_indices(obj):
    """Coordinates of ``obj`` that count against the cardinality budget."""
    free = getattr(obj, "free_indices", None)
    if free is None or len(free) == 0:
        return np.arange(obj.dim, dtype=np.intp)
    mask = np.ones(obj.dim, dtype=bool)
    mask[free] = False
    return np.flatnonzero(mask)


def select_support(y, K, free=None):
    """Free coordinates together with the ``K`` largest-magnitude constrained ones."""
    if free is None or len(free) == 0:
        return kernels.top_k_indices(y, K)
    mask = np.ones(y.shape[0], dtype=bool)
    mask[free] = False
    cons = np.flatnonzero(mask)
    chosen = cons[kernels.top_k_indices(y[cons], K)]
    return np.union1d(np.asarray(free, dtype=np.intp), chosen)


def is_feasible(x, K, obj=None):
    """Whether ``x`` has at most ``K`` nonzeros on the budgeted coordinates."""
    cons = constrained_indices(obj) if obj is not None else slice(None)
    return int(np.count_nonzero(x[cons])) <= K


def project_feasible(x, K, obj=None):
    """Hard-threshold the budgeted coordinates of ``x`` to ``K`` nonzeros."""
    cons = constrained_indices(obj) if obj is not None else np.arange(x.shape[0])
    out = x.copy()
    sub = x[cons]
    keep = kernels.top_k_indices(sub, min(K, sub.shape[0]))
    dropped = np.ones(sub.shape[0], dtype=bool)
    dropped[keep] = False
    out[cons[dropped]] = 0.0
    return out


def _check_budget(obj, K):
    n_cons = constrained_indices(obj).shape[0]
    if K > n_cons:
        raise InvalidInputError(f"K={K} exceeds the {n_cons} budgeted coordinates")


def piht_iteration(x, delta, obj, config, sampler, variances=None, gradient=None):
    """One PIHT iteration.

    Parameters
    ----------
    x : ndarray
        Current feasible iterate.
    delta : float
        Current trust parameter.
    obj : FiniteSumObjective
    config : SolverConfig
    sampler : SeededSampler
    variances : tuple of float, optional
        Pilot ``(value_variance, gradient_variance)`` at ``x``; drawn fresh
        in stochastic mode when omitted.
    gradient : ndarray, optional
        Exact gradient at ``x`` (full-batch mode only), to avoid recomputing it.

    Returns
    -------
    x_next : ndarray
        The trial point if accepted, otherwise ``x`` itself.
    delta_next : float
    record : IterationRecord
    """
    N = obj.n_samples
    params = config.accuracy
    full = config.mode == FULL_BATCH

    if full:
        g = obj.gradient(x) if gradient is None else gradient
        grad_batch = N
    else:
        if variances is None:
            variances = pilot_variance(obj, x, sampler, min(params.pilot_size, N))
        est = estimate_gradient(obj, x, delta, params, sampler, variances=variances)
        g, grad_batch = est.value, est.batch_size

    g_norm = float(np.linalg.norm(g))
    if not math.isfinite(g_norm):
        raise SolverAbort("non-finite gradient estimate", record=None)

    t = clip_factor(g_norm, config.alpha, delta)
    y = x - t * g
    support = select_support(y, config.K, getattr(obj, "free_indices", None))
    x_hat = pseudo_hard_threshold(y, support)
    s = x_hat - x
    descent_gap = float(g @ s + (s @ s) / config.alpha)
    x_trial = obj.repair(x_hat)

    if full:
        f0 = obj.value(x)
        fs = obj.value(x_trial)
        value_batch = N
    else:
        e0 = estimate_function(obj, x, delta, params, sampler, variances=variances)
        es = estimate_function(obj, x_trial, delta, params, sampler, sample_indices=e0.sample_indices)
        f0, fs, value_batch = e0.value, es.value, e0.batch_size

    rgn = float(np.linalg.norm(g[support]))
    rho = (f0 - fs) / (rgn * delta) if rgn > 0 else math.nan
    accepted = acceptance_test(f0, fs, rgn, delta, config.eta1, config.eta2)
    record = IterationRecord(
        k=-1, delta=delta, accepted=accepted, rho=rho, restricted_grad_norm=rgn,
        f0_estimate=f0, fs_estimate=fs, grad_batch=grad_batch, value_batch=value_batch,
        support=support, step_norm=float(np.linalg.norm(x_trial - x)), descent_gap=descent_gap,
    )
    if not (math.isfinite(f0) and math.isfinite(fs)):
        raise SolverAbort("non-finite function estimate", record=record)

    delta_next = update_delta(delta, accepted, config.gamma, config.delta_max)
    return (x_trial if accepted else x), delta_next, record


def restricted_gradient(x, grad, delta, config, obj):
    """Norm of ``grad`` on the support the next iteration would select at ``x``."""
    t = clip_factor(float(np.linalg.norm(grad)), config.alpha, delta)
    support = select_support(x - t * grad, config.K, getattr(obj, "free_indices", None))
    return float(np.linalg.norm(grad[support]))


def _support_grad(x, grad):
    on = x != 0.0
    return float(np.max(np.abs(grad[on]))) if on.any() else 0.0


def piht_run(obj, x0, config, callback=None):
    """Run PIHT from ``x0`` until a stopping rule fires.

    Stops after ``config.max_iterations`` iterations, when ``delta`` falls
    below ``config.delta_stop``, or (full-batch mode only) when both the
    restricted gradient norm and the gradient on the support of ``x`` are
    at most ``config.stationarity_tol``.

    Parameters
    ----------
    obj : FiniteSumObjective
    x0 : array_like
        Starting point. An infeasible one is projected onto the feasible
        set with a warning.
    config : SolverConfig
    callback : callable, optional
        Called as ``callback(record, x_next)`` after each iteration.

    Returns
    -------
    SolverResult
    """
    x = as_vector(x0, "x0").copy()
    if x.shape[0] != obj.dim:
        raise InvalidInputError(f"x0 has dimension {x.shape[0]}, objective expects {obj.dim}")
    _check_budget(obj, config.K)
    warnings = []
    if not is_feasible(x, config.K, obj):
        msg = f"x0 has more than K={config.K} nonzeros; projected onto the feasible set"
        logger.warning(msg)
        warnings.append(msg)
        x = project_feasible(x, config.K, obj)
    for notice in config.theory_notices():
        logger.info("theory coupling not satisfied: %s", notice)

    sampler = SeededSampler(config.seed)
    full = config.mode == FULL_BATCH
    delta = config.delta0
    trace = []
    variances = None
    stop = STOP_MAX_ITERATIONS
    for k in range(config.max_iterations):
        if delta < config.delta_stop:
            stop = STOP_DELTA_FLOOR
            break
        grad = None
        if full:
            grad = obj.gradient(x)
            tol = config.stationarity_tol
            if (restricted_gradient(x, grad, delta, config, obj) <= tol
                    and _support_grad(x, grad) <= tol):
                stop = STOP_STATIONARY
                break
        elif variances is None:
            variances = pilot_variance(obj, x, sampler, min(config.accuracy.pilot_size, obj.n_samples))
        try:
            x_next, delta_next, rec = piht_iteration(
                x, delta, obj, config, sampler, variances=variances, gradient=grad)
        except SolverAbort as exc:
            if exc.record is not None:
                exc.record = _with_k(exc.record, k)
            raise
        rec = _with_k(rec, k)
        trace.append(rec)
        if rec.descent_gap > DESCENT_SLACK:
            logger.debug("iteration %d: descent inequality gap %.3e", k, rec.descent_gap)
        if rec.accepted:
            variances = None
        x, delta = x_next, delta_next
        if callback is not None:
            callback(rec, x)

    return SolverResult(
        final_point=x,
        trace=trace,
        stop_reason=stop,
        delta_square_sum=float(sum(r.delta * r.delta for r in trace)),
        final_delta=delta,
        warnings=warnings,
    )


def _with_k(record, k):
    return IterationRecord(**{**record.__dict__, "k": k})


def final_diagnostics(obj, result, config, tol=None):
    """Exact full-batch diagnostics at a run's final point.

    Stationarity quantities are computed on the budgeted coordinates; the
    gradient on free coordinates is reported separately.

    Returns
    -------
    dict
        ``objective``, ``restricted_grad_norm``, ``free_grad_norm``,
        ``minimal_L`` and the ``report`` (:class:`StationarityReport`).
    """
    tol = config.stationarity_tol if tol is None else tol
    x = result.final_point
    g = obj.gradient(x)
    cons = constrained_indices(obj)
    free = getattr(obj, "free_indices", np.empty(0, dtype=np.intp))
    minimal = minimal_stationary_L(x[cons], g[cons], config.K, tol=tol)
    return {
        "objective": obj.value(x),
        "restricted_grad_norm": restricted_gradient(x, g, result.final_delta, config, obj),
        "free_grad_norm": float(np.linalg.norm(g[free])) if len(free) else 0.0,
        "minimal_L": minimal,
        "report": stationarity_report(x[cons], g[cons], config.K, tol=tol),
    }


__all__ = [
    "SolverConfig",
    "IterationRecord",
    "SolverResult",
    "STOCHASTIC",
    "FULL_BATCH",
    "STOP_MAX_ITERATIONS",
    "STOP_DELTA_FLOOR",
    "STOP_STATIONARY",
    "DESCENT_SLACK",
    "UNDEFINED",
    "acceptance_test",
    "update_delta",
    "select_support",
    "is_feasible",
    "project_feasible",
    "constrained_indices",
    "restricted_gradient",
    "piht_iteration",
    "piht_run",
    "final_diagnostics",
]
