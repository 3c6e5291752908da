"""Polynomial chaos surrogates with sampling-scheme benchmarking.

Builds sparse generalized polynomial chaos expansions of black-box
models from random, Latin Hypercube, coherence-optimal and greedy
optimal designs, and benchmarks the schemes against each other.
"""

__version__ = "0.1.0"

from .basis import (
    InputSpec,
    MultiIndexSet,
    assemble_matrix,
    build_multi_index_set,
    eval_basis_matrix,
)
from .sampling import SampleSet
from .surrogate import GpceModel, fit, load_model, moments, nrmsd, predict, save_model

__all__ = [
    "InputSpec",
    "MultiIndexSet",
    "SampleSet",
    "GpceModel",
    "assemble_matrix",
    "build_multi_index_set",
    "eval_basis_matrix",
    "fit",
    "predict",
    "moments",
    "nrmsd",
    "save_model",
    "load_model",
    "__version__",
]
