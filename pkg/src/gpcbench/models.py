"""Reference test problems: Ishigami, generalized Rosenbrock, Linear
Paired Product, and the electrode-impedance Randles circuit."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import InputSpec

ISHIGAMI_A = 7.0
ISHIGAMI_B = 0.1


def ishigami(x, a: float = ISHIGAMI_A, b: float = ISHIGAMI_B, x3: float = 1.0):
    """sin(x1) + a sin(x2)^2 + b x3^4 sin(x1), with x3 held fixed."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.sin(x[:, 0]) + a * np.sin(x[:, 1]) ** 2 + b * x3**4 * np.sin(x[:, 0])


def rosenbrock(x):
    """Sum over consecutive pairs of 100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] < 2:
        raise ValueError("needs at least two dimensions")
    head, tail = x[:, :-1], x[:, 1:]
    return np.sum(100.0 * (tail - head**2) ** 2 + (head - 1.0) ** 2, axis=1)


def lpp(x):
    """Linear Paired Product: sum of products of consecutive coordinates."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] < 2:
        raise ValueError("needs at least two dimensions")
    return np.sum(x[:, :-1] * x[:, 1:], axis=1)


# (R_s, R_ct, R_d, Q_d, alpha_d, Q_dl, alpha_dl); resistances in Ohm,
# CPE magnitudes in F. R_ct upper bound is the mean +10%.
ELECTRODE_LOWER = np.array([0.0, 9.0e3, 108.0e3, 3.6e-10, 0.855, 5.4e-7, 0.603])
ELECTRODE_UPPER = np.array([1.0e3, 11.0e3, 132.0e3, 4.4e-10, 1.0, 6.6e-7, 0.737])
ELECTRODE_MEAN = np.array([0.5e3, 10.0e3, 120.0e3, 4.0e-10, 0.95, 6.0e-7, 0.67])


def electrode_impedance(params, omega):
    """Complex impedance of the modified Randles circuit.

    params: (n, 7) rows of (R_s, R_ct, R_d, Q_d, alpha_d, Q_dl, alpha_dl);
    omega: angular frequencies in rad/s (scalar or 1-d array).
    Returns an (n, n_omega) complex array. Complex powers use the
    principal branch.
    """
    p = np.atleast_2d(np.asarray(params, dtype=float))
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    r_s, r_ct, r_d, q_d, a_d, q_dl, a_dl = (p[:, k, None] for k in range(7))
    jw = 1j * omega[None, :]
    diffusion = r_d / (1.0 + r_d * q_d * jw**a_d)
    branch = 1.0 / (r_ct + diffusion)
    return r_s + 1.0 / (q_dl * jw**a_dl + branch)


def electrode_frequencies(n_freq: int = 1000) -> np.ndarray:
    """Log-spaced frequency grid between 1 Hz and 1 GHz, endpoints included."""
    return np.logspace(0.0, 9.0, n_freq)


def electrode_qoi_vector(params, n_freq: int = 1000) -> np.ndarray:
    """Real parts then imaginary parts of the impedance over the grid."""
    omega = 2.0 * np.pi * electrode_frequencies(n_freq)
    z = electrode_impedance(params, omega)
    return np.concatenate([z.real, z.imag], axis=1)


@dataclass(frozen=True)
class TestProblem:
    """A named model with input bounds and recommended expansion orders."""

    name: str
    spec: InputSpec
    evaluate: Callable[[np.ndarray], np.ndarray]  # (n, d) -> (n, n_qoi)
    order: int
    interaction_order: int


def _as_columns(fn):
    def wrapped(x):
        return np.asarray(fn(x), dtype=float).reshape(np.atleast_2d(x).shape[0], -1)

    return wrapped


def get_problem(name: str, n_freq: int = 1000) -> TestProblem:
    """Problem registry addressable by name.

    "electrode" accepts n_freq to shrink the frequency grid (QOI count is
    2 * n_freq) for desk-scale runs.
    """
    if name == "ishigami":
        spec = InputSpec(np.full(2, -np.pi), np.full(2, np.pi))
        return TestProblem("ishigami", spec, _as_columns(ishigami), 12, 2)
    if name == "rosenbrock6":
        spec = InputSpec(np.full(6, -2.0), np.full(6, 2.0))
        return TestProblem("rosenbrock6", spec, _as_columns(rosenbrock), 5, 2)
    if name == "lpp30":
        spec = InputSpec(np.full(30, -1.0), np.full(30, 1.0))
        return TestProblem("lpp30", spec, _as_columns(lpp), 2, 2)
    if name == "electrode":
        spec = InputSpec(ELECTRODE_LOWER, ELECTRODE_UPPER)
        return TestProblem(
            "electrode", spec, lambda x: electrode_qoi_vector(x, n_freq), 5, 3
        )
    raise KeyError(f"unknown problem {name!r}")


PROBLEM_NAMES = ("ishigami", "rosenbrock6", "lpp30", "electrode")
