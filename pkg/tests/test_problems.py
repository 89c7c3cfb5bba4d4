"""Benchmark objectives, generators, the data loader and the verification oracles."""
import math

import numpy as np
import pytest

from piht.errors import BudgetExceededError, DomainError, InvalidInputError
from piht.problems import (
    DIAGONAL_FLOOR,
    GgmProblem,
    LeastSquaresProblem,
    LogisticProblem,
    MatrixParseError,
    brute_force_sparse_minimizer,
    finite_difference_gradient,
    generate_ggm,
    generate_sparse_logistic,
    generate_sparse_ls,
    ggm_gradient,
    ggm_value,
    load_matrix_file,
    write_matrix_file,
)
from piht.sparsity import hard_threshold


def rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def random_ggm(p, rng, N=None, lam2=0.0):
    N = N or 3 * p
    prob = GgmProblem(rng.standard_normal((N, p)) / math.sqrt(N), lam2=lam2)
    theta = np.concatenate([rng.uniform(0.5, 2.0, p), 0.3 * rng.standard_normal(prob.n_offdiag)])
    return prob, theta


def dense_ggm_value(X_tilde, W, lam2=0.0):
    """Objective built from the explicit matrix, one row at a time."""
    total = 0.0
    for i in range(W.shape[0]):
        r = X_tilde @ W[i]
        total += -math.log(W[i, i]) + float(r @ r) / W[i, i]
    return total + lam2 * float(np.sum(W * W))


# -- least squares ---------------------------------------------------------------

def test_ls_sample_example():
    prob = LeastSquaresProblem([[1.0, 0.0]], [0.0])
    assert prob.sample_value([2.0, 5.0], 0) == 2.0
    assert prob.sample_gradient([2.0, 5.0], 0).tolist() == [2.0, 0.0]
    exact = LeastSquaresProblem([[1.0, 2.0]], [5.0])
    assert exact.sample_value([1.0, 2.0], 0) == 0.0
    assert not np.any(exact.sample_gradient([1.0, 2.0], 0))


def test_ls_rejects_bad_shapes_and_sample_index():
    with pytest.raises(InvalidInputError):
        LeastSquaresProblem(np.ones((3, 2)), np.ones(2))
    with pytest.raises(InvalidInputError):
        LeastSquaresProblem([[1.0]], [1.0]).sample_value([0.0], 1)


@pytest.mark.parametrize("seed", range(5))
def test_ls_gradient_finite_differences(seed):
    prob, _ = generate_sparse_ls(7, 30, 3, noise_std=0.3, seed=seed)
    x = np.random.default_rng(seed).standard_normal(7)
    assert rel_err(prob.gradient(x), finite_difference_gradient(prob.value, x)) <= 1e-6
    for i in (0, 29):
        fd = finite_difference_gradient(lambda z: prob.sample_value(z, i), x)
        assert rel_err(prob.sample_gradient(x, i), fd) <= 1e-6


def test_generate_sparse_ls():
    prob, x_true = generate_sparse_ls(20, 100, 3, noise_std=0.0, seed=4)
    assert np.count_nonzero(x_true) == 3 and set(np.abs(x_true[x_true != 0])) == {1.0}
    assert prob.value(x_true) == pytest.approx(0.0, abs=1e-28)
    again, x2 = generate_sparse_ls(20, 100, 3, noise_std=0.0, seed=4)
    assert np.array_equal(prob.A, again.A) and np.array_equal(x_true, x2)
    with pytest.raises(InvalidInputError):
        generate_sparse_ls(3, 10, 4)


# -- logistic --------------------------------------------------------------------

def test_logistic_examples():
    a = np.array([0.5, -2.0])
    prob = LogisticProblem([a], [-1.0])
    x0 = np.array([2.0, 0.5])  # a^T x = 0
    assert prob.sample_value(x0, 0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert prob.sample_gradient(x0, 0) == pytest.approx(0.5 * a, rel=1e-15)
    sat = LogisticProblem([[1.0]], [1.0])
    v = sat.sample_value([50.0], 0)
    assert 0.0 <= v < 1e-20
    assert np.all(np.isfinite(sat.sample_gradient([-800.0], 0)))
    assert sat.sample_value([-800.0], 0) == pytest.approx(800.0)


def test_logistic_rejects_bad_labels():
    with pytest.raises(InvalidInputError):
        LogisticProblem([[1.0], [2.0]], [1.0, 0.0])


@pytest.mark.parametrize("seed", range(5))
def test_logistic_gradient_finite_differences(seed):
    prob, _ = generate_sparse_logistic(6, 40, 2, seed=seed)
    x = np.random.default_rng(seed).standard_normal(6)
    assert rel_err(prob.gradient(x), finite_difference_gradient(prob.value, x)) <= 1e-6


# -- GGM -------------------------------------------------------------------------

def test_ggm_identity_instance():
    for p in (2, 3, 5):
        prob = GgmProblem(np.eye(p))
        assert ggm_value(prob, prob.identity_params()) == pytest.approx(p, rel=1e-15)


def test_ggm_diagonal_instance():
    p, d = 4, 1.7
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((p, p)))
    prob = GgmProblem(Q)  # Q^T Q = I
    expected = p * (-math.log(d) + d)
    assert ggm_value(prob, prob.identity_params(d)) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_ggm_value_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    prob, theta = random_ggm(5, rng, lam2=0.1 * seed)
    W = prob.decode(theta)
    assert ggm_value(prob, theta) == pytest.approx(dense_ggm_value(prob.X_tilde, W, prob.lam2), rel=1e-12)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_ggm_gradient_finite_differences(p):
    rng = np.random.default_rng(p)
    prob, theta = random_ggm(p, rng)
    fd = finite_difference_gradient(lambda t: ggm_value(prob, t), theta)
    assert rel_err(ggm_gradient(prob, theta), fd) <= 1e-5
    # identity data and weights: every component vanishes
    ident = GgmProblem(np.eye(2))
    t0 = ident.identity_params()
    assert np.allclose(ggm_gradient(ident, t0), 0.0, atol=1e-14)
    assert np.allclose(finite_difference_gradient(ident.value, t0), 0.0, atol=1e-9)


def test_ggm_diagonal_point_offdiag_gradient():
    rng = np.random.default_rng(3)
    prob, theta = random_ggm(4, rng)
    theta[prob.p:] = 0.0
    W = prob.decode(theta)
    C = prob.X_tilde.T @ prob.X_tilde
    # d/dw_ij of ||X w_i||^2 / w_ii is 2 (W C)_ij / w_ii; row j contributes the mirror term
    M = 2.0 * (W @ C) / np.diag(W)[:, None]
    iu = np.triu_indices(4, 1)
    expected = M[iu] + M.T[iu]
    assert np.allclose(expected, 4.0 * C[iu], rtol=1e-12)
    g = ggm_gradient(prob, theta)
    assert np.allclose(g[prob.p:], expected, rtol=1e-12, atol=1e-14)
    fd = finite_difference_gradient(prob.value, theta)
    assert rel_err(g[prob.p:], fd[prob.p:]) <= 1e-6


def test_ggm_full_gradient_is_mean_of_sample_gradients():
    rng = np.random.default_rng(8)
    prob, theta = random_ggm(5, rng, N=17)
    per_sample = prob.sample_gradients(theta, prob.all_indices)
    assert rel_err(prob.gradient(theta), per_sample.mean(axis=0)) <= 1e-12
    vals = prob.sample_values(theta, prob.all_indices)
    assert prob.value(theta) == pytest.approx(vals.mean(), rel=1e-12)


def test_ggm_encode_decode_bijection():
    rng = np.random.default_rng(1)
    prob, theta = random_ggm(6, rng)
    W = prob.decode(theta)
    assert np.array_equal(W, W.T)
    assert np.array_equal(prob.encode(W), theta)
    assert np.array_equal(prob.decode(prob.encode(W)), W)
    with pytest.raises(InvalidInputError):
        prob.encode(W + np.triu(np.ones((6, 6)), 1))


def test_ggm_domain_and_repair():
    prob, theta = random_ggm(3, np.random.default_rng(0))
    theta[1] = 0.0
    with pytest.raises(DomainError):
        ggm_value(prob, theta)
    fixed = prob.repair(theta)
    assert fixed[1] == DIAGONAL_FLOOR and fixed is not theta
    assert prob.repair(fixed) is fixed


def test_generate_ggm_structure():
    prob, precision = generate_ggm(12, 50, 14, seed=2, margin=0.05, n_blocks=3)
    assert prob.X_tilde.shape == (50, 12)
    off = np.triu(precision, 1)
    assert np.count_nonzero(off) == 14
    assert np.linalg.eigvalsh(precision)[0] > 0
    assert np.allclose(prob.X_tilde.sum(axis=0), 0.0, atol=1e-12)
    with pytest.raises(InvalidInputError):
        generate_ggm(6, 10, 2, n_blocks=1)


# -- finite differences ----------------------------------------------------------

def test_finite_difference_examples():
    g = finite_difference_gradient(lambda z: float(z @ z), np.array([1.0, 2.0]), h=1e-5)
    assert np.allclose(g, [2.0, 4.0], atol=1e-8)
    assert not np.any(finite_difference_gradient(lambda z: 3.0, np.ones(4)))
    with pytest.raises(InvalidInputError):
        finite_difference_gradient(lambda z: 0.0, np.ones(2), h=0.0)


# -- brute force -----------------------------------------------------------------

def test_brute_force_recovers_constructed_minimizer():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((30, 6))
    x_star = np.array([3.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    x, support, value = brute_force_sparse_minimizer(LeastSquaresProblem(A, A @ x_star), 2)
    assert support.tolist() == [0, 1]
    assert np.allclose(x, x_star, atol=1e-12) and value <= 1e-24


def test_brute_force_with_full_budget_is_least_squares():
    prob, _ = generate_sparse_ls(5, 20, 2, noise_std=0.5, seed=1)
    x, support, _ = brute_force_sparse_minimizer(prob, 5)
    assert support.tolist() == list(range(5))
    assert np.allclose(x, np.linalg.lstsq(prob.A, prob.b, rcond=None)[0], atol=1e-10)


def test_brute_force_beats_thresholded_refit_and_random_points():
    prob, _ = generate_sparse_ls(6, 25, 2, noise_std=0.5, seed=2)
    _, _, best = brute_force_sparse_minimizer(prob, 2)
    heuristic = np.nonzero(hard_threshold(np.linalg.lstsq(prob.A, prob.b, rcond=None)[0], 2))[0]
    x_h = np.zeros(6)
    x_h[heuristic] = np.linalg.lstsq(prob.A[:, heuristic], prob.b, rcond=None)[0]
    assert best <= prob.value(x_h) + 1e-15
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x = np.zeros(6)
        x[rng.choice(6, 2, replace=False)] = 3 * rng.standard_normal(2)
        assert best <= prob.value(x)


def test_brute_force_matches_ground_truth_support():
    prob, x_true = generate_sparse_ls(20, 100, 3, noise_std=0.0, seed=7)
    _, support, value = brute_force_sparse_minimizer(prob, 3)
    assert support.tolist() == np.flatnonzero(x_true).tolist() and value < 1e-20


def test_brute_force_budget_guard():
    prob, _ = generate_sparse_ls(30, 40, 2, seed=0)
    with pytest.raises(BudgetExceededError):
        brute_force_sparse_minimizer(prob, 2)


# -- data files ------------------------------------------------------------------

def test_load_small_matrix(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n3,4\n")
    m = load_matrix_file(path)
    assert m.values.tolist() == [[1.0, 2.0], [3.0, 4.0]] and m.column_names is None


def test_load_header_and_tabs(tmp_path):
    path = tmp_path / "m.tsv"
    path.write_text("a\tb\n1\t2\n\n3\t4\n")
    m = load_matrix_file(path)
    assert m.column_names == ["a", "b"] and m.row_count == 2 and m.col_count == 2


@pytest.mark.parametrize("text, row", [("1,2\n3\n", 2), ("1,2\n3,x\n", 2), ("1,2\n3,nan\n", 2), ("", 1)])
def test_load_errors_name_the_row(tmp_path, text, row):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(MatrixParseError) as info:
        load_matrix_file(path)
    assert info.value.row == row
    if text:
        assert f"row {row}" in str(info.value)


def test_matrix_round_trip(tmp_path):
    values = np.random.default_rng(0).standard_normal((7, 4)) * 10.0 ** np.arange(-3, 1)
    path = tmp_path / "rt.csv"
    write_matrix_file(path, values, column_names=["w", "x", "y", "z"])
    m = load_matrix_file(path)
    assert np.allclose(m.values, values, rtol=1e-12, atol=0) and m.column_names == ["w", "x", "y", "z"]
