"""Coefficient recovery: L1 path solver and L2 pseudo-inverse baseline.

The L1 route standardizes columns to unit norm, traces the Lasso
homotopy path (via scikit-learn's LARS implementation), picks a knot by
k-fold cross-validation of least-squares refits on the path supports
(hybrid LARS: the path selects variables, the refit removes shrinkage
bias) and maps the coefficients back to the original column scaling.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import lars_path

from .basis import GpceMatrix


@dataclass(frozen=True)
class LarsPath:
    """Lasso path in the scaled column space.

    alphas are the regularization knots (descending, scikit-learn
    convention: max absolute column/residual correlation divided by the
    row count); coefs has one column per knot. chosen is the knot index
    selected by the model-selection rule.
    """

    alphas: np.ndarray
    coefs: np.ndarray  # (n_features, n_knots)
    chosen: int
    cv_errors: np.ndarray | None = None


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, GpceMatrix):
        return matrix.values
    return np.atleast_2d(np.asarray(matrix, dtype=float))


def _ols_on_support(gram, xty, support, ridge: float):
    """Least-squares coefficients restricted to the support columns,
    from the precomputed Gram matrix and right-hand side."""
    if support.size == 0:
        return np.zeros(0)
    sub = gram[support[:, None], support[None, :]].copy()
    if ridge:
        sub.flat[:: support.size + 1] += ridge
    rhs = xty[support]
    try:
        return np.linalg.solve(sub, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(sub, rhs, rcond=None)[0]


def _cv_fold_indices(m: int, k: int, seed: int):
    rng = np.random.default_rng(seed)
    return np.array_split(rng.permutation(m), k)


# CV evaluates refits at up to this many knots, spread evenly over the
# path (endpoints always included); bounds the cost on long paths
MAX_CV_KNOTS = 32


def _candidate_knots(n_knots: int) -> np.ndarray:
    if n_knots <= MAX_CV_KNOTS:
        return np.arange(n_knots)
    return np.unique(np.round(np.linspace(0, n_knots - 1, MAX_CV_KNOTS)).astype(int))


def _silent_lars_path(x, y, method):
    with warnings.catch_warnings():
        # degenerate-regressor drops are routine once the active set
        # saturates the row count; the path stays valid
        warnings.simplefilter("ignore", ConvergenceWarning)
        return lars_path(x, y, method=method)


def _fold_grams(x, folds):
    """Per-fold training Gram matrices, stacked for batched CV solves."""
    trains, vals, grams = [], [], []
    m = x.shape[0]
    for val_idx in folds:
        train = np.setdiff1d(np.arange(m), val_idx, assume_unique=True)
        if train.size == 0 or val_idx.size == 0:
            continue
        trains.append(train)
        vals.append(val_idx)
        grams.append(x[train].T @ x[train])
    if not trains:
        return None
    return trains, vals, np.stack(grams)


def _cv_select(x, y, coefs, fold_data):
    """Knot index with the smallest k-fold CV error of the per-support
    least-squares refits; ties within a relative 1e-9 resolve to the
    sparsest knot. Returns (chosen, cv_errors) with NaN at knots that
    were not evaluated."""
    trains, vals, gram_stack = fold_data
    n_knots = coefs.shape[1]
    candidates = _candidate_knots(n_knots)
    xty_stack = np.stack([x[tr].T @ y[tr] for tr in trains])
    x_vals = [x[v] for v in vals]
    y_vals = [y[v] for v in vals]
    counts = sum(v.size for v in vals)
    errors = np.zeros(len(candidates))
    for i, j in enumerate(candidates):
        s = np.flatnonzero(coefs[:, j])
        if s.size == 0:
            errors[i] = sum(float(yv @ yv) for yv in y_vals)
            continue
        sub = gram_stack[:, s[:, None], s[None, :]].copy()
        sub[:, np.arange(s.size), np.arange(s.size)] += 1e-10
        rhs = xty_stack[:, s, None]
        try:
            c = np.linalg.solve(sub, rhs)[..., 0]
        except np.linalg.LinAlgError:
            c = np.stack([
                np.linalg.lstsq(sub[f], rhs[f, :, 0], rcond=None)[0]
                for f in range(sub.shape[0])
            ])
        err = 0.0
        for f, (xv, yv) in enumerate(zip(x_vals, y_vals)):
            resid = xv[:, s] @ c[f] - yv
            err += float(resid @ resid)
        errors[i] = err
    errors /= counts
    best = float(np.min(errors))
    chosen = int(candidates[int(np.argmax(errors <= best * (1.0 + 1e-9)))])
    cv_errors = np.full(n_knots, np.nan)
    cv_errors[candidates] = errors
    return chosen, cv_errors


def lars_lasso_path(matrix, y, selection: str = "cv", cv_folds: int | None = None,
                    seed: int = 0, knot: int | None = None,
                    residual_tol: float | None = None,
                    method: str = "lasso",
                    refit: bool = True) -> tuple[LarsPath, np.ndarray]:
    """Fit the Lasso (or pure-LARS) path and select a knot.

    Returns the path (in scaled coordinates) and the de-scaled
    coefficient vector at the chosen knot; with refit (default) the
    returned vector is the least-squares solution restricted to the
    chosen knot's support, which removes the L1 shrinkage bias.
    Selection rules:

    - "cv" (default): minimum k-fold cross-validation error of the
      per-support least-squares refits over the path knots,
      k = min(cv_folds or 10, M), fold assignment fixed by the seed;
      ties within a relative 1e-9 resolve to the sparsest knot;
    - "knot": the explicit knot index given by `knot`;
    - "tol": the first knot whose relative residual drops below
      `residual_tol`.
    """
    a = _as_array(matrix)
    y = np.asarray(y, dtype=float).ravel()
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite inputs")
    m, n = a.shape
    if y.shape[0] != m:
        raise ValueError("observation count must match matrix rows")
    if not np.any(y):
        zero = np.zeros(n)
        path = LarsPath(alphas=np.zeros(1), coefs=np.zeros((n, 1)), chosen=0)
        return path, zero

    norms = np.linalg.norm(a, axis=0)
    norms[norms == 0.0] = 1.0
    x = a / norms

    alphas, _, coefs = _silent_lars_path(x, y, method)

    if selection == "knot":
        if knot is None or not 0 <= knot < len(alphas):
            raise ValueError("knot index out of range")
        chosen, cv_errors = knot, None
    elif selection == "tol":
        if residual_tol is None:
            raise ValueError("residual_tol required for tol selection")
        y_norm = np.linalg.norm(y)
        res = np.linalg.norm(y[:, None] - x @ coefs, axis=0) / y_norm
        below = np.flatnonzero(res <= residual_tol)
        chosen = int(below[0]) if below.size else len(alphas) - 1
        cv_errors = None
    elif selection == "cv":
        k = min(cv_folds or 10, m)
        fold_data = _fold_grams(x, _cv_fold_indices(m, k, seed)) if k >= 2 else None
        if fold_data is None:
            chosen, cv_errors = len(alphas) - 1, None
        else:
            chosen, cv_errors = _cv_select(x, y, coefs, fold_data)
    else:
        raise ValueError(f"unknown selection rule {selection!r}")

    if refit:
        support = np.flatnonzero(coefs[:, chosen])
        coef_scaled = np.zeros(n)
        coef_scaled[support] = _ols_on_support(x.T @ x, x.T @ y, support, ridge=0.0)
    else:
        coef_scaled = coefs[:, chosen]
    path = LarsPath(alphas=alphas, coefs=coefs, chosen=chosen, cv_errors=cv_errors)
    return path, coef_scaled / norms


def lars_lasso_fit(matrix, y, selection: str = "cv", cv_folds: int | None = None,
                   seed: int = 0, **kwargs) -> np.ndarray:
    """Sparse coefficient vector at the selected Lasso-path knot."""
    _, coef = lars_lasso_path(matrix, y, selection=selection, cv_folds=cv_folds,
                              seed=seed, **kwargs)
    return coef


def lars_lasso_fit_multi(matrix, y, cv_folds: int | None = None,
                         seed: int = 0, method: str = "lasso") -> np.ndarray:
    """CV-selected, refitted coefficients for every column of y at once.

    Equivalent to per-column lars_lasso_fit with CV selection, but the
    fold Gram matrices depend only on the design and are computed once
    and shared across columns. Returns (n_features, n_qoi).
    """
    a = _as_array(matrix)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite inputs")
    m, n = a.shape
    if y.shape[0] != m:
        raise ValueError("observation count must match matrix rows")
    norms = np.linalg.norm(a, axis=0)
    norms[norms == 0.0] = 1.0
    x = a / norms
    k = min(cv_folds or 10, m)
    fold_data = _fold_grams(x, _cv_fold_indices(m, k, seed)) if k >= 2 else None
    full_gram = x.T @ x

    out = np.zeros((n, y.shape[1]))
    for q in range(y.shape[1]):
        yq = y[:, q]
        if not np.any(yq):
            continue
        alphas, _, coefs = _silent_lars_path(x, yq, method)
        if fold_data is not None:
            chosen, _ = _cv_select(x, yq, coefs, fold_data)
        else:
            chosen = len(alphas) - 1
        support = np.flatnonzero(coefs[:, chosen])
        out[support, q] = _ols_on_support(full_gram, x.T @ yq, support, ridge=0.0)
    return out / norms[:, None]


def kkt_residual(matrix, y, coef, alpha: float) -> float:
    """Worst violation of the Lasso stationarity conditions at level alpha.

    Inactive columns must correlate with the residual by at most
    alpha * M; active columns must hit that bound exactly with matching
    sign. Columns are assumed unit-norm (the scaled path space).
    """
    x = _as_array(matrix)
    y = np.asarray(y, dtype=float).ravel()
    m = x.shape[0]
    corr = x.T @ (y - x @ coef)
    lam = alpha * m
    active = coef != 0.0
    worst = 0.0
    if np.any(~active):
        worst = max(worst, float(np.max(np.abs(corr[~active])) - lam))
    if np.any(active):
        worst = max(worst, float(np.max(np.abs(corr[active] - lam * np.sign(coef[active])))))
    return worst


def least_squares_pinv(matrix, y, rcond: float = 1e-12) -> np.ndarray:
    """Minimum-norm least-squares solution via SVD pseudo-inverse.

    Singular values below rcond times the largest are discarded.
    """
    a = _as_array(matrix)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite inputs")
    coef, *_ = np.linalg.lstsq(a, y, rcond=rcond)
    return coef
