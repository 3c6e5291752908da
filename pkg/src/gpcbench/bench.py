"""Convergence studies across sampling schemes: repeated fits over a
sample-size grid, error-crossing statistics, success rates and the
one-tailed Mann-Whitney significance test against random sampling."""
from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .basis import build_multi_index_set, eval_basis_matrix, assemble_matrix
from .criteria import mutual_coherence
from .models import get_problem
from .sampling import (
    GreedyConfig,
    coherence_optimal,
    greedy_l1_optimal,
    lhs_pool_optimal,
    lhs_sc_ese,
    lhs_standard,
    random_grid,
)
from .solver import lars_lasso_fit_multi, least_squares_pinv
from .surrogate import reference_moments_mc

SCHEMES = (
    "random",
    "lhs-std",
    "lhs-mm",
    "lhs-phip",
    "lhs-sc-ese",
    "co",
    "mc",
    "mc-cc",
    "d",
    "d-coh",
)

# schemes whose full-size design defines valid prefixes; the LHS family
# loses stratification when truncated and is regenerated per size
NESTED_SCHEMES = frozenset({"random", "co", "mc", "mc-cc", "d", "d-coh"})

SOLVERS = ("lars", "pinv")


@dataclass(frozen=True)
class StudyConfig:
    problem: str
    schemes: tuple
    grid: tuple
    repetitions: int = 30
    thresholds: tuple = (1e-3, 1e-2, 1e-1)
    solver: str = "lars"
    seed: int = 0
    n_test: int = 10000
    n_ref: int = 1_000_000
    n_freq: int = 1000
    pool_factor: int = 10
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "grid", tuple(int(n) for n in self.grid))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])) or not self.grid:
            raise ValueError("sample-size grid must be nonempty, strictly increasing")
        if self.repetitions < 2:
            raise ValueError("need at least two repetitions")
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ValueError(f"unknown scheme {scheme!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")


@dataclass(frozen=True)
class ConvergenceRecord:
    scheme: str
    rep: int
    n: int
    nrmsd: float
    mu: float
    mean_err: float
    std_err: float


@dataclass(frozen=True)
class Crossing:
    n: float
    recross: bool = False


@dataclass(frozen=True)
class SchemeSummary:
    scheme: str
    threshold: float
    n_eps_median: float | None
    n_eps_std: float | None
    n_sr95: float | None
    n_sr99: float | None
    p_value: float | None
    n_defined: int = 0
    recross: bool = False


def _sub_seed(master: int, *parts) -> int:
    tokens = [master & 0xFFFFFFFF]
    for part in parts:
        if isinstance(part, str):
            tokens.append(zlib.crc32(part.encode()))
        else:
            tokens.append(int(part) & 0xFFFFFFFF)
    return int(np.random.SeedSequence(tokens).generate_state(1, np.uint64)[0])


def make_design(scheme: str, m: int, basis, seed: int, pool_size: int | None = None):
    """Instantiate a sample set of size m under the named scheme."""
    d = basis.d
    if scheme == "random":
        return random_grid(m, d, seed)
    if scheme == "lhs-std":
        return lhs_standard(m, d, seed)
    if scheme == "lhs-mm":
        return lhs_pool_optimal(m, d, seed, criterion="maximin")
    if scheme == "lhs-phip":
        return lhs_pool_optimal(m, d, seed, criterion="phi_p")
    if scheme == "lhs-sc-ese":
        return lhs_sc_ese(m, d, seed)
    if scheme == "co":
        return coherence_optimal(m, basis, seed)
    if scheme in ("mc", "mc-cc", "d", "d-coh"):
        pool = pool_size if pool_size is not None else 10 * m
        cfg = GreedyConfig(pool_size=pool, target_size=m, criterion=scheme)
        return greedy_l1_optimal(cfg, basis, seed=seed)
    raise ValueError(f"unknown scheme {scheme!r}")


def _fit_coefficients(matrix, y_weighted, solver, seed, cv_folds=None):
    if solver == "pinv":
        return least_squares_pinv(matrix, y_weighted)
    return lars_lasso_fit_multi(matrix, y_weighted, cv_folds=cv_folds, seed=seed)


def _moment_error(estimate: np.ndarray, reference: np.ndarray) -> float:
    denom = np.where(np.abs(reference) > 1e-12, np.abs(reference), 1.0)
    return float(np.mean(np.abs(estimate - reference) / denom))


def _unit_records(config: StudyConfig, scheme: str, rep: int, shared: dict):
    """All records of one (scheme, repetition) work unit."""
    problem = get_problem(config.problem, n_freq=config.n_freq)
    basis = build_multi_index_set(problem.spec.d, problem.order, problem.interaction_order)
    psi_test = eval_basis_matrix(basis, 2.0 * shared["u_test"] - 1.0)
    y_test = shared["y_test"]
    spans = y_test.max(axis=0) - y_test.min(axis=0)
    valid_qoi = spans > 0.0

    m_max = config.grid[-1]
    designs = {}
    if scheme in NESTED_SCHEMES:
        seed = _sub_seed(config.seed, scheme, rep)
        full = make_design(scheme, m_max, basis, seed,
                           pool_size=config.pool_factor * m_max)
        y_full = problem.evaluate(problem.spec.from_unit(full.points))
        for n in config.grid:
            designs[n] = (full.prefix(n), y_full[:n])
    else:
        for n in config.grid:
            seed = _sub_seed(config.seed, scheme, rep, n)
            design = make_design(scheme, n, basis, seed)
            designs[n] = (design, problem.evaluate(problem.spec.from_unit(design.points)))

    records = []
    for n in config.grid:
        design, y = designs[n]
        y = np.asarray(y, dtype=float).reshape(n, -1)
        try:
            matrix = assemble_matrix(design, basis, problem.spec)
            try:
                mu = mutual_coherence(matrix.values)
            except ValueError:
                mu = float("nan")
            y_w = design.weights[:, None] * y if matrix.weighted else y
            coeffs = _fit_coefficients(
                matrix, y_w, config.solver, _sub_seed(config.seed, scheme, "cv", rep, n)
            )
        except (ValueError, np.linalg.LinAlgError):
            continue  # solver failure: missing entry, not an abort
        y_hat = psi_test @ coeffs
        rms = np.sqrt(np.mean((y_test - y_hat) ** 2, axis=0))
        eps = float(np.mean(rms[valid_qoi] / spans[valid_qoi]))
        mean_hat = coeffs[0]
        std_hat = np.sqrt(np.sum(coeffs[1:] ** 2, axis=0))
        records.append(
            ConvergenceRecord(
                scheme=scheme,
                rep=rep,
                n=n,
                nrmsd=eps,
                mu=mu,
                mean_err=_moment_error(mean_hat, shared["ref_mean"]),
                std_err=_moment_error(std_hat, shared["ref_std"]),
            )
        )
    return records


def _unit_star(args):
    return _unit_records(*args)


def run_study(config: StudyConfig) -> list[ConvergenceRecord]:
    """Run every (scheme, repetition) unit and collect records.

    Units execute independently (optionally in parallel workers); the
    result order and values are independent of the worker count.
    """
    problem = get_problem(config.problem, n_freq=config.n_freq)
    rng = np.random.default_rng(_sub_seed(config.seed, "test-set"))
    u_test = rng.random((config.n_test, problem.spec.d))
    y_test = np.asarray(
        problem.evaluate(problem.spec.from_unit(u_test)), dtype=float
    ).reshape(config.n_test, -1)
    ref_mean, ref_std = reference_moments_mc(
        problem.evaluate, problem.spec, config.n_ref,
        seed=_sub_seed(config.seed, "reference-moments"),
    )
    shared = {
        "u_test": u_test,
        "y_test": y_test,
        "ref_mean": ref_mean,
        "ref_std": ref_std,
    }
    units = [
        (config, scheme, rep, shared)
        for scheme in config.schemes
        for rep in range(config.repetitions)
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(_unit_star, units))
    else:
        chunks = [_unit_records(*unit) for unit in units]
    records = [record for chunk in chunks for record in chunk]
    order = {scheme: i for i, scheme in enumerate(config.schemes)}
    records.sort(key=lambda r: (order[r.scheme], r.rep, r.n))
    return records


def error_crossing(ns, eps, threshold: float) -> Crossing | None:
    """First threshold crossing of a per-repetition error curve, located
    by linear interpolation in (N, log10 error); None if never reached.

    The recross flag marks curves that rise above the threshold again
    after the first crossing.
    """
    ns = np.asarray(ns, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if ns.size == 0:
        raise ValueError("empty curve")
    below = np.isfinite(eps) & (eps <= threshold)
    if not below.any():
        return None
    i = int(np.argmax(below))
    recross = bool(np.any(~below[i:]))
    if i == 0:
        return Crossing(float(ns[0]), recross)
    prev = eps[i - 1]
    if not np.isfinite(prev) or prev <= 0.0 or eps[i] <= 0.0:
        return Crossing(float(ns[i]), recross)
    frac = (math.log10(prev) - math.log10(threshold)) / (
        math.log10(prev) - math.log10(eps[i])
    )
    return Crossing(float(ns[i - 1] + frac * (ns[i] - ns[i - 1])), recross)


def success_rate_curve(records, threshold: float):
    """Fraction of repetitions at or below the threshold for each grid
    size, over the given records of a single scheme."""
    reps = sorted({r.rep for r in records})
    if len(reps) < 2:
        raise ValueError("need at least two repetitions")
    ns = sorted({r.n for r in records})
    by_rep_n = {(r.rep, r.n): r.nrmsd for r in records}
    rates = []
    for n in ns:
        hits = sum(
            1
            for rep in reps
            if np.isfinite(by_rep_n.get((rep, n), np.nan))
            and by_rep_n[(rep, n)] <= threshold
        )
        rates.append(hits / len(reps))
    return np.asarray(ns, dtype=float), np.asarray(rates)


def n_for_rate(curve, q: float) -> float | None:
    """Smallest (interpolated) size at which the success rate reaches q."""
    ns, rates = curve
    reached = rates >= q
    if not reached.any():
        return None
    i = int(np.argmax(reached))
    if i == 0:
        return float(ns[0])
    r0, r1 = rates[i - 1], rates[i]
    return float(ns[i - 1] + (q - r0) * (ns[i] - ns[i - 1]) / (r1 - r0))


def _u_statistic(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    less = (a[:, None] < b[None, :]).sum()
    ties = (a[:, None] == b[None, :]).sum()
    return float(less) + 0.5 * float(ties)


def mann_whitney_exact(a, b) -> float:
    """One-tailed p-value (alternative: a stochastically smaller than b)
    by exhaustive enumeration of group assignments of the pooled values."""
    a = list(a)
    b = list(b)
    if not a or not b:
        raise ValueError("both samples must be nonempty")
    u_obs = _u_statistic(a, b)
    pooled = sorted(a + b)
    n1 = len(a)
    total = 0
    at_least = 0
    idx = range(len(pooled))
    for pick in combinations(idx, n1):
        sim_a = [pooled[i] for i in pick]
        sim_b = [pooled[i] for i in idx if i not in set(pick)]
        total += 1
        if _u_statistic(sim_a, sim_b) >= u_obs - 1e-9:
            at_least += 1
    return at_least / total


def mann_whitney_normal(a, b) -> float:
    """One-tailed p-value by normal approximation with tie and continuity
    corrections."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    n1, n2 = a.size, b.size
    n = n1 + n2
    u = _u_statistic(a, b)
    pooled = np.concatenate([a, b])
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = ((counts**3 - counts).sum()) / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0.0:
        return 1.0
    z = (u - n1 * n2 / 2.0 - 0.5) / math.sqrt(var)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_u_one_tailed(a, b) -> float:
    """One-tailed Mann-Whitney U test for "a requires fewer samples than
    b": exact enumeration for group sizes up to 8, normal approximation
    with tie and continuity corrections beyond."""
    if max(len(list(a)), len(list(b))) <= 8:
        return mann_whitney_exact(a, b)
    return mann_whitney_normal(a, b)


def _crossings_by_rep(records, threshold: float):
    reps = sorted({r.rep for r in records})
    out = []
    for rep in reps:
        curve = sorted((r for r in records if r.rep == rep), key=lambda r: r.n)
        out.append(error_crossing([r.n for r in curve], [r.nrmsd for r in curve], threshold))
    return out


def summarize(records, thresholds, baseline_scheme: str = "random") -> list[SchemeSummary]:
    """Per scheme and threshold: median and std of the per-repetition
    crossings, success-rate sizes, and the one-tailed p-value against
    the baseline scheme. Repetitions that never reach the threshold
    enter the significance test as +inf (worse than any crossing)."""
    schemes = []
    for r in records:
        if r.scheme not in schemes:
            schemes.append(r.scheme)
    if baseline_scheme not in schemes:
        raise ValueError(f"records do not include baseline scheme {baseline_scheme!r}")
    by_scheme = {s: [r for r in records if r.scheme == s] for s in schemes}

    def crossing_values(crossings):
        return [c.n if c is not None else math.inf for c in crossings]

    rows = []
    for threshold in thresholds:
        baseline_vals = crossing_values(_crossings_by_rep(by_scheme[baseline_scheme], threshold))
        for scheme in schemes:
            crossings = _crossings_by_rep(by_scheme[scheme], threshold)
            defined = [c.n for c in crossings if c is not None]
            recross = any(c.recross for c in crossings if c is not None)
            curve = success_rate_curve(by_scheme[scheme], threshold)
            p_value = mann_whitney_u_one_tailed(crossing_values(crossings), baseline_vals)
            rows.append(
                SchemeSummary(
                    scheme=scheme,
                    threshold=threshold,
                    n_eps_median=float(np.median(defined)) if defined else None,
                    n_eps_std=float(np.std(defined)) if defined else None,
                    n_sr95=n_for_rate(curve, 0.95),
                    n_sr99=n_for_rate(curve, 0.99),
                    p_value=p_value,
                    n_defined=len(defined),
                    recross=recross,
                )
            )
    return rows


def relative_summary(rows, baseline_scheme: str = "random"):
    """Rows normalized by the baseline scheme at each threshold; the
    baseline row is all ones."""
    base = {
        row.threshold: row for row in rows if row.scheme == baseline_scheme
    }
    out = []
    for row in rows:
        ref = base.get(row.threshold)
        if ref is None:
            raise ValueError("missing baseline row")

        def rel(v, r):
            if v is None or r is None or r == 0:
                return None
            return v / r

        out.append(
            (
                row.scheme,
                row.threshold,
                rel(row.n_eps_median, ref.n_eps_median),
                rel(row.n_sr95, ref.n_sr95),
                rel(row.n_sr99, ref.n_sr99),
            )
        )
    return out


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float) and not math.isfinite(value):
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_records_csv(records, path) -> None:
    with open(path, "w") as fh:
        fh.write("scheme,rep,n,nrmsd,mu,mean_err,std_err\n")
        for r in records:
            fh.write(
                f"{r.scheme},{r.rep},{r.n},{_fmt(r.nrmsd)},{_fmt(r.mu)},"
                f"{_fmt(r.mean_err)},{_fmt(r.std_err)}\n"
            )


def write_summary_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("grid,threshold,n_eps_median,n_eps_std,n_sr95,n_sr99,p_value,recross\n")
        for row in rows:
            fh.write(
                f"{row.scheme},{_fmt(row.threshold)},{_fmt(row.n_eps_median)},"
                f"{_fmt(row.n_eps_std)},{_fmt(row.n_sr95)},{_fmt(row.n_sr99)},"
                f"{_fmt(row.p_value)},{int(row.recross)}\n"
            )


def write_success_csv(records, thresholds, path) -> None:
    schemes = []
    for r in records:
        if r.scheme not in schemes:
            schemes.append(r.scheme)
    with open(path, "w") as fh:
        fh.write("scheme,threshold,n,rate\n")
        for scheme in schemes:
            scheme_records = [r for r in records if r.scheme == scheme]
            for threshold in thresholds:
                ns, rates = success_rate_curve(scheme_records, threshold)
                for n, rate in zip(ns, rates):
                    fh.write(f"{scheme},{_fmt(float(threshold))},{int(n)},{_fmt(float(rate))}\n")
