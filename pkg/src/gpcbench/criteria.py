"""Scoring criteria for measurement matrices and point sets.

Matrix criteria (mutual coherence, average cross-correlation, hybrid
score, D-optimality) drive the greedy compressive-sampling designs;
distance criteria (maximin, phi-p, periodic variants) drive the
space-filling Latin hypercube designs.
"""
from __future__ import annotations

import numpy as np

# distances closer than this are treated as ties when grouping
DISTANCE_TIE_TOL = 1e-12


def mutual_coherence(matrix: np.ndarray) -> float:
    """Largest absolute normalized inner product between distinct columns."""
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.shape[1] < 2:
        raise ValueError("mutual coherence needs at least two columns")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("zero column has undefined normalization")
    gram = np.abs(a.T @ a) / np.outer(norms, norms)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def avg_cross_correlation(matrix: np.ndarray) -> float:
    """Mean squared normalized inner product over distinct column pairs.

    With unit-normalized columns this equals the squared Frobenius
    distance between the Gramian and the identity divided by the pair
    count K*(K-1); without the normalization a row-selection greedy
    degenerately favors small-norm rows."""
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    k = a.shape[1]
    if k < 2:
        raise ValueError("cross-correlation needs at least two columns")
    norms = np.linalg.norm(a, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("zero column has undefined normalization")
    gram = (a.T @ a) / np.outer(norms, norms)
    np.fill_diagonal(gram, 0.0)
    return float(np.sum(gram**2) / (k * (k - 1)))


def hybrid_score(mu_candidates, gamma_candidates) -> int:
    """Index of the candidate minimizing the min-max-normalized squared sum
    of mutual coherence and average cross-correlation.

    A metric that is constant over all candidates contributes zero.
    """
    mu = np.asarray(mu_candidates, dtype=float)
    gamma = np.asarray(gamma_candidates, dtype=float)
    if mu.size == 0 or mu.shape != gamma.shape:
        raise ValueError("candidate lists must be nonempty and equally long")
    return int(np.argmin(hybrid_score_values(mu, gamma)))


def hybrid_score_values(mu: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Per-candidate hybrid scores (see hybrid_score)."""
    def normalized(v):
        span = v.max() - v.min()
        if span == 0.0:
            return np.zeros_like(v)
        return (v - v.min()) / span

    return normalized(np.asarray(mu, float)) ** 2 + normalized(np.asarray(gamma, float)) ** 2


def d_optimality(matrix: np.ndarray) -> tuple[float, str]:
    """D-optimality score of a measurement matrix.

    With at least as many rows as columns and a nonsingular Gramian
    G = (1/M) Psi^T Psi the score is det(G^-1)^(1/N_c) (smaller is
    better). Rank-deficient systems fall back to the row-Gram surrogate
    det(Psi Psi^T)^(1/M) (larger is better); the returned mode string
    distinguishes the two ("inverse-gramian" / "row-gram"). A singular
    square Gramian yields (+inf, "singular").
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    m, n = a.shape
    if m >= n:
        gram = a.T @ a / m
        sign, logdet = np.linalg.slogdet(gram)
        if sign <= 0 or not np.isfinite(logdet):
            return float("inf"), "singular"
        return float(np.exp(-logdet / n)), "inverse-gramian"
    row_gram = a @ a.T
    sign, logdet = np.linalg.slogdet(row_gram)
    if sign <= 0 or not np.isfinite(logdet):
        return float("inf"), "singular"
    return float(np.exp(logdet / m)), "row-gram"


def pairwise_distances(points: np.ndarray, t: float = 2.0, periodic: bool = False) -> np.ndarray:
    """Flat vector of pairwise t-norm distances.

    Periodic distances wrap each coordinate difference on the unit torus:
    min(|dx|, 1 - |dx|).
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    iu, ju = np.triu_indices(n, k=1)
    delta = np.abs(x[iu] - x[ju])
    if periodic:
        delta = np.minimum(delta, 1.0 - delta)
    return (delta ** t).sum(axis=1) ** (1.0 / t)


def maximin_distance(points, t: float = 2.0, periodic: bool = False) -> float:
    """Minimum pairwise inter-site distance (to be maximized)."""
    return float(pairwise_distances(points, t=t, periodic=periodic).min())


def phi_p(points, p_exp: float = 10.0, t: float = 2.0, periodic: bool = False) -> float:
    """Distance-aggregate criterion (sum over the distance list of
    multiplicity * d^-p, to the power 1/p); smaller spreads points better.

    Coincident points make the criterion infinite.
    """
    dists = pairwise_distances(points, t=t, periodic=periodic)
    if np.any(dists < DISTANCE_TIE_TOL):
        return float("inf")
    # grouping equal distances with multiplicities leaves the sum unchanged
    return float(np.sum(dists ** (-p_exp)) ** (1.0 / p_exp))


def _phi_p_from_dists(dists: np.ndarray, p_exp: float) -> float:
    if np.any(dists < DISTANCE_TIE_TOL):
        return float("inf")
    return float(np.sum(dists ** (-p_exp)) ** (1.0 / p_exp))
