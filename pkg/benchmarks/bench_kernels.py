"""Benchmark the numba kernels against their numpy fallbacks.

Run: python benchmarks/bench_kernels.py [--repeats 20]

Each kernel is called once to trigger compilation, then timed over
``--repeats`` calls; the best time is reported. Outputs of both backends
are compared so a speedup never hides a wrong answer. The ``used`` column
shows which implementation ``piht.kernels`` dispatches to.
"""
import argparse
import time

import numpy as np

from piht import kernels
from piht.kernels import _numpy

try:
    from piht.kernels import _numba
except ImportError:
    _numba = None


def _best_time(fn, args, repeats):
    fn(*args)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(rng):
    n, N = 200, 5000
    A = rng.standard_normal((N, n))
    b = rng.standard_normal(N)
    x = np.where(rng.random(n) < 0.05, rng.standard_normal(n), 0.0)
    y = np.where(rng.random(N) < 0.5, 1.0, -1.0)
    idx = np.sort(rng.choice(N, size=N // 4, replace=False)).astype(np.intp)

    p = 40
    rows = rng.standard_normal((2000, p))
    theta = np.concatenate([np.ones(p), 0.05 * rng.standard_normal(p * (p - 1) // 2)])
    gidx = np.arange(2000, dtype=np.intp)

    v = rng.standard_normal(100_000)
    return [
        ("top_k_indices", (v, 50)),
        ("ls_batch_value", (A, b, x, idx)),
        ("ls_batch_gradient", (A, b, x, idx)),
        ("ls_sample_gradients", (A, b, x, idx[:256])),
        ("logistic_batch_value", (A, y, x, idx)),
        ("logistic_batch_gradient", (A, y, x, idx)),
        ("ggm_batch_value", (rows, theta, gidx)),
        ("ggm_batch_gradient", (rows, theta, gidx)),
        ("ggm_sample_gradients", (rows, theta, gidx[:64])),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _numba is None:
        print("numba is not installed; nothing to compare")
        return 0
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}  {'used':<6} max|diff|")
    for name, case_args in _cases(rng):
        f_np, f_nb = getattr(_numpy, name), getattr(_numba, name)
        diff = float(np.max(np.abs(np.asarray(f_np(*case_args), dtype=float)
                                   - np.asarray(f_nb(*case_args), dtype=float))))
        t_np = _best_time(f_np, case_args, args.repeats)
        t_nb = _best_time(f_nb, case_args, args.repeats)
        used = "numba" if getattr(kernels, name) is f_nb else "numpy"
        print(f"{name:<26}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.2f}  {used:<6} {diff:.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
