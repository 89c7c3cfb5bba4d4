"""Pure-numpy implementations of the hot kernels.

Every function here has a numba twin in ``_numba.py`` with the same
signature. Batch reductions sum over the sample axis in ascending
sample-index order; ``idx`` is always sorted by the caller.
"""
import numpy as np


def magnitude_order(v):
    # stable sort keeps ascending index order among equal magnitudes
    return np.argsort(-np.abs(v), kind="stable")


def top_k_indices(v, k):
    return np.sort(magnitude_order(v)[:k])


# -- least squares: F_i(x) = 0.5 * (a_i^T x - b_i)^2 -------------------------

def ls_sample_values(A, b, x, idx):
    r = A[idx] @ x - b[idx]
    return 0.5 * r * r


def ls_sample_gradients(A, b, x, idx):
    rows = A[idx]
    r = rows @ x - b[idx]
    return r[:, None] * rows


def ls_batch_value(A, b, x, idx):
    return np.add.reduce(ls_sample_values(A, b, x, idx)) / len(idx)


def ls_batch_gradient(A, b, x, idx):
    return np.add.reduce(ls_sample_gradients(A, b, x, idx), axis=0) / len(idx)


# -- logistic: F_i(x) = log(1 + exp(-y_i a_i^T x)) ---------------------------

def _log1pexp(t):
    # log(1 + exp(t)) without overflow
    return np.where(t > 0, t + np.log1p(np.exp(-np.abs(t))), np.log1p(np.exp(-np.abs(t))))


def _sigmoid(t):
    e = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def logistic_sample_values(A, y, x, idx):
    margin = y[idx] * (A[idx] @ x)
    return _log1pexp(-margin)


def logistic_sample_gradients(A, y, x, idx):
    rows = A[idx]
    yi = y[idx]
    coef = -yi * _sigmoid(-yi * (rows @ x))
    return coef[:, None] * rows


def logistic_batch_value(A, y, x, idx):
    return np.add.reduce(logistic_sample_values(A, y, x, idx)) / len(idx)


def logistic_batch_gradient(A, y, x, idx):
    return np.add.reduce(logistic_sample_gradients(A, y, x, idx), axis=0) / len(idx)


# -- GGM pseudo-likelihood ---------------------------------------------------
# Parameters are (d, u): d the diagonal of W, u its strict upper triangle in
# row-major order. Sample s contributes
#     F_s(W) = sum_i [ -log d_i + (w_i^T x_s)^2 / d_i ]
# where x_s are the rows of sqrt(N) * X_tilde.

def ggm_decode(theta, p):
    W = np.zeros((p, p))
    iu = np.triu_indices(p, 1)
    W[iu] = theta[p:]
    W = W + W.T
    W[np.diag_indices(p)] = theta[:p]
    return W


def ggm_sample_values(X, theta, idx):
    p = X.shape[1]
    d = theta[:p]
    Z = X[idx] @ ggm_decode(theta, p)
    return np.add.reduce(Z * Z / d, axis=1) - np.add.reduce(np.log(d))


def ggm_sample_gradients(X, theta, idx):
    p = X.shape[1]
    d = theta[:p]
    rows = X[idx]
    Z = rows @ ggm_decode(theta, p)
    Zd = Z / d
    # G[s, i, j] = 2 z_si x_sj / d_i is dF_s/dW_ij with W_ij, W_ji independent
    G = 2.0 * Zd[:, :, None] * rows[:, None, :]
    iu, ju = np.triu_indices(p, 1)
    out = np.empty((len(idx), theta.shape[0]))
    out[:, :p] = -1.0 / d - Zd * Zd + np.einsum("sii->si", G)
    out[:, p:] = G[:, iu, ju] + G[:, ju, iu]
    return out


def ggm_batch_value(X, theta, idx):
    p = X.shape[1]
    d = theta[:p]
    Z = X[idx] @ ggm_decode(theta, p)
    q = np.add.reduce(Z * Z, axis=0) / len(idx)
    return np.add.reduce(q / d - np.log(d))


def ggm_batch_gradient(X, theta, idx):
    p = X.shape[1]
    d = theta[:p]
    rows = X[idx]
    m = len(idx)
    Z = rows @ ggm_decode(theta, p)
    S = (Z.T @ rows) / m
    q = np.add.reduce(Z * Z, axis=0) / m
    G = 2.0 * S / d[:, None]
    iu, ju = np.triu_indices(p, 1)
    out = np.empty_like(theta)
    out[:p] = -1.0 / d - q / (d * d) + np.diag(G)
    out[p:] = G[iu, ju] + G[ju, iu]
    return out
