"""L1 path solver against closed-form and linear-programming oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from gpcbench.solver import (
    kkt_residual,
    lars_lasso_fit,
    lars_lasso_fit_multi,
    lars_lasso_path,
    least_squares_pinv,
)


def _unit_columns(matrix):
    return matrix / np.linalg.norm(matrix, axis=0)


def _basis_pursuit_lp(matrix, y):
    """min ||c||_1 subject to matrix @ c = y, as a linear program."""
    m, n = matrix.shape
    res = linprog(
        c=np.ones(2 * n),
        A_eq=np.hstack([matrix, -matrix]),
        b_eq=y,
        bounds=[(0, None)] * (2 * n),
        method="highs",
    )
    assert res.success
    return res.x[:n] - res.x[n:]


def test_one_sparse_exact_recovery():
    rng = np.random.default_rng(0)
    matrix = rng.normal(size=(12, 6))
    y = matrix[:, 3] * 2.5
    coef = lars_lasso_fit(matrix, y, seed=0)
    assert abs(coef[3] - 2.5) < 1e-10
    assert np.max(np.abs(np.delete(coef, 3))) < 1e-10


def test_orthonormal_design_soft_thresholding():
    # with orthonormal columns the path equals soft-thresholded LS
    m = 8
    matrix = np.linalg.qr(np.random.default_rng(1).normal(size=(m, m)))[0][:, :5]
    y = np.random.default_rng(2).normal(size=m)
    path, _ = lars_lasso_path(matrix, y, selection="knot", knot=0, refit=False)
    b = matrix.T @ y
    for j, alpha in enumerate(path.alphas):
        lam = alpha * m
        expected = np.sign(b) * np.maximum(np.abs(b) - lam, 0.0)
        assert np.allclose(path.coefs[:, j], expected, atol=1e-8)


def test_matches_basis_pursuit_oracle_on_50_instances():
    rng = np.random.default_rng(3)
    for trial in range(50):
        n = int(rng.integers(4, 7))  # basis count <= 6
        m = int(rng.integers(n + 2, 11))  # rows <= 10
        s = int(rng.integers(1, 3))  # planted sparsity <= 2
        matrix = _unit_columns(rng.normal(size=(m, n)))
        support = rng.choice(n, size=s, replace=False)
        planted = np.zeros(n)
        planted[support] = rng.normal(size=s) + np.sign(rng.normal(size=s))
        y = matrix @ planted
        oracle = _basis_pursuit_lp(matrix, y)
        coef = lars_lasso_fit(matrix, y, seed=trial)
        assert np.max(np.abs(coef - oracle)) < 1e-6, f"trial {trial}"


def test_kkt_conditions_along_path():
    rng = np.random.default_rng(4)
    matrix = _unit_columns(rng.normal(size=(10, 5)))
    y = rng.normal(size=10)
    path, _ = lars_lasso_path(matrix, y, selection="knot", knot=0, refit=False)
    for j, alpha in enumerate(path.alphas):
        assert kkt_residual(matrix, y, path.coefs[:, j], alpha) < 1e-8


def test_chosen_knot_minimizes_cv_error():
    rng = np.random.default_rng(5)
    matrix = rng.normal(size=(20, 10))
    y = matrix @ np.array([0.0, 3.0, 0.0, -1.0, 0, 0, 0, 0, 0, 0]) + 0.1 * rng.normal(size=20)
    path, _ = lars_lasso_path(matrix, y, seed=1)
    evaluated = np.flatnonzero(np.isfinite(path.cv_errors))
    assert path.chosen in evaluated
    assert path.cv_errors[path.chosen] <= np.nanmin(path.cv_errors) * (1.0 + 1e-9)


def test_zero_response_returns_zero_vector():
    matrix = np.random.default_rng(6).normal(size=(5, 3))
    assert np.array_equal(lars_lasso_fit(matrix, np.zeros(5)), np.zeros(3))


def test_non_finite_inputs_rejected():
    matrix = np.ones((3, 2))
    with pytest.raises(ValueError):
        lars_lasso_fit(matrix, np.array([1.0, np.nan, 0.0]))
    bad = matrix.copy()
    bad[0, 0] = np.inf
    with pytest.raises(ValueError):
        lars_lasso_fit(bad, np.ones(3))
    with pytest.raises(ValueError):
        least_squares_pinv(matrix, np.array([1.0, np.inf, 0.0]))


def test_selection_rule_validation():
    matrix = np.random.default_rng(7).normal(size=(6, 3))
    y = np.random.default_rng(8).normal(size=6)
    with pytest.raises(ValueError):
        lars_lasso_path(matrix, y, selection="knot", knot=99)
    with pytest.raises(ValueError):
        lars_lasso_path(matrix, y, selection="tol")
    with pytest.raises(ValueError):
        lars_lasso_path(matrix, y, selection="bogus")


def test_multi_qoi_matches_per_column_fits():
    rng = np.random.default_rng(9)
    matrix = rng.normal(size=(25, 12))
    y = np.column_stack(
        [matrix @ (rng.normal(size=12) * (rng.random(12) < 0.3)) for _ in range(4)]
    )
    multi = lars_lasso_fit_multi(matrix, y, seed=5)
    for q in range(4):
        single = lars_lasso_fit(matrix, y[:, q], seed=5)
        assert np.array_equal(multi[:, q], single)


def test_least_squares_pinv_cases():
    rng = np.random.default_rng(10)
    square = rng.normal(size=(4, 4))
    y = rng.normal(size=4)
    assert np.linalg.norm(square @ least_squares_pinv(square, y) - y) < 1e-10

    tall = rng.normal(size=(8, 3))
    c = rng.normal(size=3)
    assert np.allclose(least_squares_pinv(tall, tall @ c), c, atol=1e-10)

    # underdetermined 2x3: minimum-norm solution is A^T (A A^T)^-1 y
    wide = rng.normal(size=(2, 3))
    y2 = rng.normal(size=2)
    expected = wide.T @ np.linalg.solve(wide @ wide.T, y2)
    assert np.allclose(least_squares_pinv(wide, y2), expected, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_planted_recovery_property(seed):
    # incoherent gaussian design, sparsity s <= M/4: exact recovery
    rng = np.random.default_rng(seed)
    m, n, s = 24, 40, 5
    matrix = rng.normal(size=(m, n)) / np.sqrt(m)
    support = rng.choice(n, size=s, replace=False)
    planted = np.zeros(n)
    planted[support] = rng.normal(size=s) + np.sign(rng.normal(size=s))
    coef = lars_lasso_fit(matrix, matrix @ planted, seed=seed)
    assert np.max(np.abs(coef - planted)) < 1e-6
