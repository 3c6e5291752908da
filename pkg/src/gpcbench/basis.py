"""Truncated multi-index sets and orthonormal Legendre bases.

The surrogate expands a model output in tensorized Legendre polynomials
that are orthonormal with respect to the uniform density on [-1, 1]^d.
Sample points live in the unit hypercube [0, 1]^d and are mapped to
[-1, 1]^d for basis evaluation and to physical units for model calls.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class MultiIndexSet:
    """Ordered set of d-tuples of polynomial degrees.

    Contains every index whose total order (L1 norm) is at most `p` and
    whose interaction order (number of nonzero entries) is at most `p_i`,
    in graded lexicographic order (ascending total order, then
    lexicographic). The all-zero index comes first.
    """

    d: int
    p: int
    p_i: int
    indices: np.ndarray  # (n_basis, d) int array

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=int))
        self.indices.setflags(write=False)

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def n_basis(self) -> int:
        return self.indices.shape[0]


def _compositions(total: int, parts: int):
    """All tuples of `parts` positive integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def build_multi_index_set(d: int, p: int, p_i: int) -> MultiIndexSet:
    """Construct the truncated index set of dimension d, total order <= p,
    interaction order <= p_i."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if p < 0 or p_i < 0:
        raise ValueError("orders must be non-negative")
    indices = [(0,) * d]
    for total in range(1, p + 1):
        for k in range(1, min(p_i, total, d) + 1):
            for support in combinations(range(d), k):
                for comp in _compositions(total, k):
                    alpha = [0] * d
                    for pos, val in zip(support, comp):
                        alpha[pos] = val
                    indices.append(tuple(alpha))
    indices.sort(key=lambda a: (sum(a), a))
    return MultiIndexSet(d=d, p=p, p_i=p_i, indices=np.array(indices, dtype=int))


def legendre_table(max_order: int, x: np.ndarray) -> np.ndarray:
    """Orthonormal Legendre values for all degrees 0..max_order.

    Normalized so that the integral of psi_m * psi_n against the uniform
    density 1/2 on [-1, 1] is the Kronecker delta, i.e. sqrt(2n+1) * P_n.
    Three-term recurrence; stable well beyond order 30.

    Returns an array of shape (len(x), max_order + 1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.empty((x.shape[0], max_order + 1))
    table[:, 0] = 1.0
    if max_order >= 1:
        table[:, 1] = x
    for n in range(1, max_order):
        table[:, n + 1] = ((2 * n + 1) * x * table[:, n] - n * table[:, n - 1]) / (n + 1)
    table *= np.sqrt(2.0 * np.arange(max_order + 1) + 1.0)
    return table


def eval_basis_1d(order: int, x) -> np.ndarray | float:
    """Orthonormal Legendre polynomial of the given degree at x in [-1, 1]."""
    scalar = np.isscalar(x)
    values = legendre_table(order, np.atleast_1d(x))[:, order]
    return float(values[0]) if scalar else values


def eval_basis(alpha, xi) -> float:
    """Tensor-product basis value: product of 1-d polynomials per dimension."""
    alpha = np.asarray(alpha, dtype=int)
    xi = np.asarray(xi, dtype=float)
    if alpha.shape != xi.shape:
        raise ValueError(f"dimension mismatch: index {alpha.shape} vs point {xi.shape}")
    out = 1.0
    for a, x in zip(alpha, xi):
        out *= eval_basis_1d(int(a), float(x))
    return out


def eval_basis_matrix(basis: MultiIndexSet, xi: np.ndarray) -> np.ndarray:
    """Evaluate all basis functions at points xi in [-1, 1]^d.

    Returns an array of shape (n_points, n_basis).
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[1] != basis.d:
        raise ValueError(f"points have dimension {xi.shape[1]}, basis expects {basis.d}")
    max_orders = basis.indices.max(axis=0)
    tables = [legendre_table(int(max_orders[k]), xi[:, k]) for k in range(basis.d)]
    out = np.ones((xi.shape[0], basis.n_basis))
    for j, alpha in enumerate(basis.indices):
        for k, a in enumerate(alpha):
            if a:
                out[:, j] *= tables[k][:, a]
    return out


@dataclass(frozen=True)
class InputSpec:
    """Per-dimension bounds of independent uniform input distributions."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape:
            raise ValueError("lower and upper bounds must have equal length")
        if np.any(lower >= upper):
            raise ValueError("every lower bound must be below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        lower.setflags(write=False)
        upper.setflags(write=False)

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    def contains(self, x: np.ndarray, atol: float = 0.0) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x >= self.lower - atol) & (x <= self.upper + atol), axis=1)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        """Affine map from physical bounds to [-1, 1]^d."""
        x = np.asarray(x, dtype=float)
        if not np.all(self.contains(x, atol=1e-12)):
            raise ValueError("point outside input bounds")
        return 2.0 * (x - self.lower) / (self.upper - self.lower) - 1.0

    def denormalize(self, xi: np.ndarray) -> np.ndarray:
        """Inverse of normalize: [-1, 1]^d back to physical bounds."""
        xi = np.asarray(xi, dtype=float)
        return self.lower + (xi + 1.0) * 0.5 * (self.upper - self.lower)

    def from_unit(self, u: np.ndarray) -> np.ndarray:
        """Map unit-hypercube coordinates to physical bounds."""
        u = np.asarray(u, dtype=float)
        return self.lower + u * (self.upper - self.lower)


@dataclass(frozen=True)
class GpceMatrix:
    """Measurement matrix of basis evaluations, optionally row-weighted."""

    values: np.ndarray  # (n_samples, n_basis)
    weighted: bool = False

    @property
    def shape(self):
        return self.values.shape


def assemble_matrix(samples, basis: MultiIndexSet, spec: InputSpec | None = None) -> GpceMatrix:
    """Assemble the measurement matrix for a sample set in [0, 1]^d.

    Row i holds weight(i) * Psi_alpha(xi_i) with xi the sample mapped to
    [-1, 1]^d. Weights are 1 for all unweighted schemes.
    """
    points = np.atleast_2d(samples.points)
    if points.shape[0] == 0:
        raise ValueError("empty sample set")
    if spec is not None and spec.d != basis.d:
        raise ValueError("input spec dimension does not match basis")
    if points.shape[1] != basis.d:
        raise ValueError("sample dimension does not match basis")
    psi = eval_basis_matrix(basis, 2.0 * points - 1.0)
    weights = np.asarray(samples.weights, dtype=float)
    if np.allclose(weights, 1.0):
        return GpceMatrix(values=psi, weighted=False)
    return GpceMatrix(values=weights[:, None] * psi, weighted=True)
