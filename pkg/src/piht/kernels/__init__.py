"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``PIHT_DISABLE_NUMBA`` is unset or ``0``. The choice is made once,
at import time; ``BACKEND`` records it. Both backends are importable
directly as ``piht.kernels._numpy`` / ``piht.kernels._numba`` (the latter
only if numba is installed), which is what the benchmark uses.
"""
import os

from . import _numpy

_DISABLED = os.environ.get("PIHT_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("disabled by PIHT_DISABLE_NUMBA")
    from . import _numba as _impl
    HAS_NUMBA = True
except ImportError:
    _impl = _numpy
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "magnitude_order",
    "top_k_indices",
    "ls_sample_values",
    "ls_sample_gradients",
    "ls_batch_value",
    "ls_batch_gradient",
    "logistic_sample_values",
    "logistic_sample_gradients",
    "logistic_batch_value",
    "logistic_batch_gradient",
    "ggm_sample_values",
    "ggm_sample_gradients",
    "ggm_batch_value",
    "ggm_batch_gradient",
]

magnitude_order = _impl.magnitude_order
top_k_indices = _impl.top_k_indices
ls_sample_values = _impl.ls_sample_values
ls_sample_gradients = _impl.ls_sample_gradients
ls_batch_value = _impl.ls_batch_value
ls_batch_gradient = _impl.ls_batch_gradient
logistic_sample_values = _impl.logistic_sample_values
logistic_sample_gradients = _impl.logistic_sample_gradients
logistic_batch_value = _impl.logistic_batch_value
logistic_batch_gradient = _impl.logistic_batch_gradient
ggm_sample_values = _impl.ggm_sample_values
ggm_sample_gradients = _impl.ggm_sample_gradients
# The batch GGM kernels are two dense matrix products; BLAS beats compiled
# loops there, so both backends use the numpy version.
ggm_batch_value = _numpy.ggm_batch_value
ggm_batch_gradient = _numpy.ggm_batch_gradient
