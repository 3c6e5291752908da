"""Fit, evaluate and interrogate polynomial chaos surrogates."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import InputSpec, MultiIndexSet, assemble_matrix, eval_basis_matrix
from .sampling import SampleSet
from .solver import lars_lasso_fit, least_squares_pinv


@dataclass(frozen=True)
class GpceModel:
    """Expansion basis, input bounds and one coefficient column per QOI."""

    basis: MultiIndexSet
    spec: InputSpec
    coefficients: np.ndarray  # (n_basis, n_qoi)

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if coeffs.shape[0] != self.basis.n_basis:
            raise ValueError("coefficient rows must match basis size")
        object.__setattr__(self, "coefficients", coeffs)
        coeffs.setflags(write=False)

    @property
    def n_qoi(self) -> int:
        return self.coefficients.shape[1]


def fit(
    samples: SampleSet,
    observations: np.ndarray,
    basis: MultiIndexSet,
    spec: InputSpec,
    solver: str = "lars",
    seed: int = 0,
    **solver_kwargs,
) -> GpceModel:
    """Solve the (weighted) linear system for each QOI column.

    solver "lars" uses the L1 path with cross-validated knot selection,
    "pinv" the minimum-norm least-squares baseline.
    """
    y = np.asarray(observations, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[0] != samples.m:
        raise ValueError("observation rows must match sample count")
    matrix = assemble_matrix(samples, basis, spec)
    if matrix.weighted:
        y = samples.weights[:, None] * y

    coeffs = np.empty((basis.n_basis, y.shape[1]))
    for q in range(y.shape[1]):
        try:
            if solver == "lars":
                coeffs[:, q] = lars_lasso_fit(matrix, y[:, q], seed=seed, **solver_kwargs)
            elif solver == "pinv":
                coeffs[:, q] = least_squares_pinv(matrix, y[:, q], **solver_kwargs)
            else:
                raise ValueError(f"unknown solver {solver!r}")
        except ValueError as exc:
            raise ValueError(f"solver failed on QOI {q}: {exc}") from exc
    return GpceModel(basis=basis, spec=spec, coefficients=coeffs)


def predict(model: GpceModel, x_physical: np.ndarray) -> np.ndarray:
    """Surrogate values at physical-coordinate points, (n, n_qoi)."""
    x = np.atleast_2d(np.asarray(x_physical, dtype=float))
    xi = model.spec.normalize(x)
    return eval_basis_matrix(model.basis, xi) @ model.coefficients


def nrmsd(
    model: GpceModel,
    reference_evaluator,
    n_test: int = 10000,
    seed: int = 0,
) -> tuple[np.ndarray, float]:
    """Root-mean-square deviation from the reference model on an
    independent uniform test set, normalized by the reference range.

    Returns the per-QOI values and their mean; QOIs with zero range are
    excluded from the mean with a warning (NaN in the per-QOI array). If
    every QOI is degenerate, raises.
    """
    rng = np.random.default_rng(seed)
    u = rng.random((n_test, model.spec.d))
    x = model.spec.from_unit(u)
    y_ref = np.asarray(reference_evaluator(x), dtype=float).reshape(n_test, -1)
    y_hat = predict(model, x)
    if y_ref.shape != y_hat.shape:
        raise ValueError("reference evaluator QOI count does not match model")
    spans = y_ref.max(axis=0) - y_ref.min(axis=0)
    rms = np.sqrt(np.mean((y_ref - y_hat) ** 2, axis=0))
    degenerate = spans == 0.0
    if np.all(degenerate):
        raise ValueError("all QOIs have zero range on the test set")
    if np.any(degenerate):
        warnings.warn("excluding degenerate zero-range QOIs from the NRMSD mean")
    per_qoi = np.where(degenerate, np.nan, rms / np.where(degenerate, 1.0, spans))
    return per_qoi, float(np.nanmean(per_qoi))


def moments(model: GpceModel) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard deviation per QOI from the orthonormal expansion:
    the mean is the constant coefficient, the variance the sum of the
    squared remaining ones."""
    mean = model.coefficients[0].copy()
    std = np.sqrt(np.sum(model.coefficients[1:] ** 2, axis=0))
    return mean, std


def reference_moments_mc(
    evaluator,
    spec: InputSpec,
    n: int,
    seed: int = 0,
    chunk: int = 1_000_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Plain Monte Carlo mean and (unbiased-variance) standard deviation.

    Streams in chunks so n = 10^7 stays memory-bounded.
    """
    if n < 1:
        raise ValueError("need at least one evaluation")
    rng = np.random.default_rng(seed)
    total = None
    total_sq = None
    done = 0
    while done < n:
        size = min(chunk, n - done)
        x = spec.from_unit(rng.random((size, spec.d)))
        y = np.asarray(evaluator(x), dtype=float).reshape(size, -1)
        if total is None:
            total = y.sum(axis=0)
            total_sq = (y**2).sum(axis=0)
        else:
            total += y.sum(axis=0)
            total_sq += (y**2).sum(axis=0)
        done += size
    mean = total / n
    if n == 1:
        return mean, np.zeros_like(mean)
    var = (total_sq - n * mean**2) / (n - 1)
    return mean, np.sqrt(np.maximum(var, 0.0))


def save_model(model: GpceModel, path) -> None:
    """Serialize to a self-describing JSON document; floats round-trip
    exactly (shortest-decimal rendering)."""
    doc = {
        "format": "gpcbench-model",
        "version": 1,
        "dimension": model.basis.d,
        "order": model.basis.p,
        "interaction_order": model.basis.p_i,
        "lower": model.spec.lower.tolist(),
        "upper": model.spec.upper.tolist(),
        "multi_indices": model.basis.indices.tolist(),
        "coefficients": model.coefficients.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_model(path) -> GpceModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "gpcbench-model":
        raise ValueError("not a serialized surrogate model")
    basis = MultiIndexSet(
        d=doc["dimension"],
        p=doc["order"],
        p_i=doc["interaction_order"],
        indices=np.array(doc["multi_indices"], dtype=int),
    )
    spec = InputSpec(np.array(doc["lower"]), np.array(doc["upper"]))
    return GpceModel(basis=basis, spec=spec, coefficients=np.array(doc["coefficients"]))
