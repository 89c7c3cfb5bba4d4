"""numba-compiled twins of the kernels in ``_numpy.py``.

Loops accumulate over samples in the order given by ``idx`` (ascending),
so results are reproducible run to run. They agree with the numpy path to
rounding, not bitwise.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def magnitude_order(v):
    return np.argsort(-np.abs(v), kind="mergesort")


@njit(cache=True)
def top_k_indices(v, k):
    # O(n) selection: everything above the k-th largest magnitude plus the
    # lowest-index ties, emitted in ascending index order
    n = v.shape[0]
    if k >= n:
        return np.arange(n)
    out = np.empty(max(k, 0), dtype=np.intp)
    if k <= 0:
        return out
    a = np.abs(v)
    thr = np.partition(a, n - k)[n - k]
    ties = k
    for i in range(n):
        if a[i] > thr:
            ties -= 1
    c = 0
    for i in range(n):
        if a[i] > thr:
            out[c] = i
            c += 1
        elif a[i] == thr and ties > 0:
            out[c] = i
            c += 1
            ties -= 1
    return out


@njit(cache=True)
def _dot_row(A, i, x):
    s = 0.0
    for j in range(A.shape[1]):
        s += A[i, j] * x[j]
    return s


@njit(cache=True)
def ls_sample_values(A, b, x, idx):
    out = np.empty(idx.shape[0])
    for t in range(idx.shape[0]):
        i = idx[t]
        r = _dot_row(A, i, x) - b[i]
        out[t] = 0.5 * r * r
    return out


@njit(cache=True)
def ls_sample_gradients(A, b, x, idx):
    n = A.shape[1]
    out = np.empty((idx.shape[0], n))
    for t in range(idx.shape[0]):
        i = idx[t]
        r = _dot_row(A, i, x) - b[i]
        for j in range(n):
            out[t, j] = r * A[i, j]
    return out


@njit(cache=True)
def ls_batch_value(A, b, x, idx):
    s = 0.0
    for t in range(idx.shape[0]):
        i = idx[t]
        r = _dot_row(A, i, x) - b[i]
        s += 0.5 * r * r
    return s / idx.shape[0]


@njit(cache=True)
def ls_batch_gradient(A, b, x, idx):
    n = A.shape[1]
    g = np.zeros(n)
    for t in range(idx.shape[0]):
        i = idx[t]
        r = _dot_row(A, i, x) - b[i]
        for j in range(n):
            g[j] += r * A[i, j]
    return g / idx.shape[0]


@njit(cache=True)
def _log1pexp(t):
    if t > 0.0:
        return t + math.log1p(math.exp(-t))
    return math.log1p(math.exp(t))


@njit(cache=True)
def _sigmoid(t):
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


@njit(cache=True)
def logistic_sample_values(A, y, x, idx):
    out = np.empty(idx.shape[0])
    for t in range(idx.shape[0]):
        i = idx[t]
        out[t] = _log1pexp(-y[i] * _dot_row(A, i, x))
    return out


@njit(cache=True)
def logistic_sample_gradients(A, y, x, idx):
    n = A.shape[1]
    out = np.empty((idx.shape[0], n))
    for t in range(idx.shape[0]):
        i = idx[t]
        c = -y[i] * _sigmoid(-y[i] * _dot_row(A, i, x))
        for j in range(n):
            out[t, j] = c * A[i, j]
    return out


@njit(cache=True)
def logistic_batch_value(A, y, x, idx):
    s = 0.0
    for t in range(idx.shape[0]):
        i = idx[t]
        s += _log1pexp(-y[i] * _dot_row(A, i, x))
    return s / idx.shape[0]


@njit(cache=True)
def logistic_batch_gradient(A, y, x, idx):
    n = A.shape[1]
    g = np.zeros(n)
    for t in range(idx.shape[0]):
        i = idx[t]
        c = -y[i] * _sigmoid(-y[i] * _dot_row(A, i, x))
        for j in range(n):
            g[j] += c * A[i, j]
    return g / idx.shape[0]


@njit(cache=True)
def ggm_decode(theta, p):
    W = np.zeros((p, p))
    k = p
    for i in range(p):
        W[i, i] = theta[i]
        for j in range(i + 1, p):
            W[i, j] = theta[k]
            W[j, i] = theta[k]
            k += 1
    return W


@njit(cache=True)
def _ggm_z(X, W, s):
    p = W.shape[0]
    z = np.zeros(p)
    for i in range(p):
        acc = 0.0
        for j in range(p):
            acc += W[i, j] * X[s, j]
        z[i] = acc
    return z


@njit(cache=True)
def ggm_sample_values(X, theta, idx):
    p = X.shape[1]
    W = ggm_decode(theta, p)
    logdet = 0.0
    for i in range(p):
        logdet += math.log(theta[i])
    out = np.empty(idx.shape[0])
    for t in range(idx.shape[0]):
        z = _ggm_z(X, W, idx[t])
        acc = 0.0
        for i in range(p):
            acc += z[i] * z[i] / theta[i]
        out[t] = acc - logdet
    return out


@njit(cache=True)
def ggm_sample_gradients(X, theta, idx):
    p = X.shape[1]
    W = ggm_decode(theta, p)
    out = np.empty((idx.shape[0], theta.shape[0]))
    for t in range(idx.shape[0]):
        s = idx[t]
        z = _ggm_z(X, W, s)
        for i in range(p):
            zi = z[i] / theta[i]
            out[t, i] = -1.0 / theta[i] - zi * zi + 2.0 * zi * X[s, i]
        k = p
        for i in range(p):
            for j in range(i + 1, p):
                out[t, k] = 2.0 * (z[i] / theta[i] * X[s, j] + z[j] / theta[j] * X[s, i])
                k += 1
    return out


@njit(cache=True)
def ggm_batch_value(X, theta, idx):
    p = X.shape[1]
    W = ggm_decode(theta, p)
    q = np.zeros(p)
    for t in range(idx.shape[0]):
        z = _ggm_z(X, W, idx[t])
        for i in range(p):
            q[i] += z[i] * z[i]
    m = idx.shape[0]
    total = 0.0
    for i in range(p):
        total += q[i] / m / theta[i] - math.log(theta[i])
    return total


@njit(cache=True)
def ggm_batch_gradient(X, theta, idx):
    p = X.shape[1]
    W = ggm_decode(theta, p)
    m = idx.shape[0]
    S = np.zeros((p, p))
    q = np.zeros(p)
    for t in range(m):
        s = idx[t]
        z = _ggm_z(X, W, s)
        for i in range(p):
            q[i] += z[i] * z[i]
            for j in range(p):
                S[i, j] += z[i] * X[s, j]
    out = np.empty_like(theta)
    for i in range(p):
        d = theta[i]
        out[i] = -1.0 / d - q[i] / m / (d * d) + 2.0 * S[i, i] / m / d
    k = p
    for i in range(p):
        for j in range(i + 1, p):
            out[k] = 2.0 * (S[i, j] / m / theta[i] + S[j, i] / m / theta[j])
            k += 1
    return out
