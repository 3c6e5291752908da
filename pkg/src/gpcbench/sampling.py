"""Sample-set generators for every benchmarked scheme.

All schemes produce points in the unit hypercube [0, 1]^d and are fully
determined by (scheme parameters, seed). Coherence-optimal sampling
additionally carries importance weights; all other schemes are
unweighted.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .basis import MultiIndexSet, eval_basis_matrix
from .criteria import hybrid_score_values, maximin_distance, phi_p


@dataclass(frozen=True)
class SampleSet:
    """M points in [0, 1]^d with per-point weights and provenance."""

    points: np.ndarray  # (M, d)
    weights: np.ndarray  # (M,)
    scheme: str
    seed: int

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if points.shape[0] != weights.shape[0]:
            raise ValueError("one weight per point required")
        if np.any((points < 0.0) | (points > 1.0)):
            raise ValueError("sample coordinates must lie in [0, 1]")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        points.setflags(write=False)
        weights.setflags(write=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def prefix(self, n: int) -> "SampleSet":
        """First n points (and weights) of this set."""
        if n < 1 or n > self.m:
            raise ValueError(f"prefix size {n} out of range 1..{self.m}")
        return SampleSet(self.points[:n], self.weights[:n], self.scheme, self.seed)


def random_grid(m: int, d: int, seed: int) -> SampleSet:
    """Independent uniform points."""
    if m < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    return SampleSet(rng.random((m, d)), np.ones(m), "random", seed)


def _lhs_points(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    pts = np.empty((m, d))
    for k in range(d):
        perm = rng.permutation(m) + 1
        u = rng.random(m)
        pts[:, k] = (perm - u) / m
    return pts


def lhs_standard(m: int, d: int, seed: int) -> SampleSet:
    """Latin hypercube: per column one point in each of m equal strata."""
    if m < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    return SampleSet(_lhs_points(rng, m, d), np.ones(m), "lhs-std", seed)


def lhs_pool_optimal(
    m: int,
    d: int,
    seed: int,
    n_pool: int = 100,
    criterion: str = "maximin",
    p_exp: float = 10.0,
    t: float = 2.0,
    periodic: bool = False,
) -> SampleSet:
    """Best of n_pool independent standard LHS designs.

    criterion "maximin" maximizes the minimum inter-site distance,
    "phi_p" minimizes the phi-p aggregate. With n_pool=1 this degenerates
    to a plain standard LHS with the same seed.
    """
    if n_pool < 1:
        raise ValueError("pool must contain at least one design")
    if criterion not in ("maximin", "phi_p"):
        raise ValueError(f"unknown pool criterion {criterion!r}")
    rng = np.random.default_rng(seed)
    best_pts, best_score = None, None
    for _ in range(n_pool):
        pts = _lhs_points(rng, m, d)
        if m < 2:
            best_pts = pts
            break
        if criterion == "maximin":
            score = -maximin_distance(pts, t=t, periodic=periodic)
        else:
            score = phi_p(pts, p_exp=p_exp, t=t, periodic=periodic)
        if best_score is None or score < best_score:
            best_pts, best_score = pts, score
    tag = "lhs-mm" if criterion == "maximin" else "lhs-phip"
    return SampleSet(best_pts, np.ones(m), tag, seed)


@dataclass(frozen=True)
class EseParams:
    """Knobs of the element-exchange evolutionary optimization."""

    outer_iters: int = 30
    inner_iters: int | None = None  # defaults to min(50, 2*M)
    p_exp: float = 10.0
    t: float = 2.0
    periodic: bool = False
    threshold_frac: float = 0.005
    improve_factor: float = 0.9
    stagnate_factor: float = 1.1


def _sc_strata_points(rng: np.random.Generator, m: int, d: int, alpha: float) -> np.ndarray:
    """Stratified columns with border strata shrunk to fraction alpha of
    their width (pushed against the domain edges) and interior strata
    stretched to tile the remainder."""
    border = alpha / m
    pts = np.empty((m, d))
    for k in range(d):
        u = rng.random(m)
        vals = np.empty(m)
        vals[0] = u[0] * border
        vals[m - 1] = 1.0 - u[m - 1] * border
        if m > 2:
            width = (1.0 - 2.0 * border) / (m - 2)
            vals[1 : m - 1] = border + (np.arange(m - 2) + u[1 : m - 1]) * width
        pts[:, k] = vals[rng.permutation(m)]
    return pts


def lhs_sc_ese(
    m: int,
    d: int,
    seed: int,
    alpha: float = 0.25,
    ese_params: EseParams | None = None,
) -> SampleSet:
    """Stretched-center stratified design, exchange-optimized for phi-p.

    Columns stay permutations of the stretched strata throughout the
    optimization, so the (stretched) one-point-per-stratum property is
    preserved. The returned design never has a worse phi-p than the
    initial one.
    """
    if m < 2:
        raise ValueError("border strata need at least two samples")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    params = ese_params or EseParams()
    rng = np.random.default_rng(seed)
    pts = _sc_strata_points(rng, m, d, alpha)

    def score(x):
        return phi_p(x, p_exp=params.p_exp, t=params.t, periodic=params.periodic)

    cur = pts.copy()
    phi_cur = score(cur)
    best, phi_best = cur.copy(), phi_cur
    threshold = params.threshold_frac * (phi_cur if np.isfinite(phi_cur) else 1.0)
    n_inner = params.inner_iters if params.inner_iters is not None else min(50, 2 * m)
    for _ in range(params.outer_iters):
        improved = False
        for _ in range(n_inner):
            col = int(rng.integers(d))
            i, j = rng.choice(m, size=2, replace=False)
            cur[i, col], cur[j, col] = cur[j, col], cur[i, col]
            phi_new = score(cur)
            if phi_new - phi_cur <= threshold * rng.random():
                phi_cur = phi_new
                if phi_cur < phi_best:
                    best, phi_best = cur.copy(), phi_cur
                    improved = True
            else:
                cur[i, col], cur[j, col] = cur[j, col], cur[i, col]
        threshold *= params.improve_factor if improved else params.stagnate_factor
    return SampleSet(best, np.ones(m), "lhs-sc-ese", seed)


@dataclass(frozen=True)
class ChainParams:
    """Metropolis-Hastings chain settings for coherence-optimal sampling."""

    burn_in: int = 1000
    thin: int = 10
    proposal: str = "auto"  # "auto" | "arcsine" | "uniform"


def _proposal_kind(params: ChainParams, basis: MultiIndexSet) -> str:
    if params.proposal != "auto":
        return params.proposal
    # Legendre mass concentrates near the endpoints for high orders; the
    # arcsine density upper-bounds that concentration when p >= d.
    return "arcsine" if basis.p >= basis.d else "uniform"


def coherence_optimal(
    m: int,
    basis: MultiIndexSet,
    seed: int,
    chain_params: ChainParams | None = None,
) -> SampleSet:
    """Markov-chain samples from the density proportional to B^2(xi),
    with B(xi) the root sum of squared basis values; weights are 1/B.

    Independent-proposal Metropolis-Hastings, thinned and burned-in per
    chain_params. The chain acceptance rate is recorded on the returned
    object via the ``acceptance_rate`` attribute.
    """
    if basis.n_basis < 1:
        raise ValueError("basis must be nonempty")
    params = chain_params or ChainParams()
    rng = np.random.default_rng(seed)
    d = basis.d
    n_steps = params.burn_in + params.thin * m
    kind = _proposal_kind(params, basis)

    if kind == "arcsine":
        proposals = np.cos(np.pi * rng.random((n_steps + 1, d)))
        # log proposal density up to a constant: -1/2 sum log(1 - x^2)
        log_g = -0.5 * np.log1p(-proposals**2).sum(axis=1)
    elif kind == "uniform":
        proposals = 2.0 * rng.random((n_steps + 1, d)) - 1.0
        log_g = np.zeros(n_steps + 1)
    else:
        raise ValueError(f"unknown proposal {kind!r}")

    b2 = (eval_basis_matrix(basis, proposals) ** 2).sum(axis=1)
    if not np.all(np.isfinite(b2)) or np.any(b2 <= 0.0):
        raise AssertionError("basis bound B must be finite and positive")
    log_b2 = np.log(b2)
    log_u = np.log(rng.random(n_steps))

    state = 0
    accepted = 0
    kept = np.empty(m, dtype=int)
    n_kept = 0
    for step in range(1, n_steps + 1):
        log_ratio = (log_b2[step] - log_b2[state]) + (log_g[state] - log_g[step])
        if log_u[step - 1] < log_ratio:
            state = step
            accepted += 1
        if step > params.burn_in and (step - params.burn_in) % params.thin == 0:
            kept[n_kept] = state
            n_kept += 1
    xi = proposals[kept]
    weights = 1.0 / np.sqrt(b2[kept])
    out = SampleSet((xi + 1.0) * 0.5, weights, "co", seed)
    object.__setattr__(out, "acceptance_rate", accepted / n_steps)
    return out


@dataclass(frozen=True)
class GreedyConfig:
    """Pool-based greedy selection settings."""

    pool_size: int
    target_size: int
    criterion: str  # "mc" | "mc-cc" | "d" | "d-coh"

    def __post_init__(self):
        if self.criterion not in ("mc", "mc-cc", "d", "d-coh"):
            raise ValueError(f"unknown greedy criterion {self.criterion!r}")
        if self.target_size < 2:
            raise ValueError("target size must be at least 2")
        if self.target_size > self.pool_size:
            raise ValueError("target size exceeds pool size")


def _mc_scan(gram, sq_norms, rows, chunk=32):
    """Mutual coherence of the selected matrix extended by each candidate
    row. gram/sq_norms describe the current selected columns.

    The pairwise work runs in float32: scores only rank candidates, and
    coherence gaps between candidates sit far above float32 resolution.
    """
    n_cand, n_col = rows.shape
    out = np.empty(n_cand)
    gram32 = gram.astype(np.float32)
    diag = (np.arange(n_col), np.arange(n_col))
    for lo in range(0, n_cand, chunk):
        r = rows[lo : lo + chunk].astype(np.float32)
        with np.errstate(divide="ignore"):
            inv_t = 1.0 / np.sqrt(sq_norms.astype(np.float32)[None, :] + r**2)
        inv_t[~np.isfinite(inv_t)] = 0.0
        q = np.multiply(r[:, :, None], r[:, None, :])
        q += gram32[None, :, :]
        np.abs(q, out=q)
        q *= inv_t[:, :, None]
        q *= inv_t[:, None, :]
        q[:, diag[0], diag[1]] = 0.0
        out[lo : lo + chunk] = q.reshape(q.shape[0], -1).max(axis=1)
    return out


def _mc_cc_scan(gram, sq_norms, rows, chunk=32):
    """Mutual coherence and average cross-correlation of the selected
    matrix extended by each candidate row, sharing one normalized-Gram
    pass (float32 ranking precision, as in _mc_scan; the pair sums
    accumulate in float64)."""
    n_cand, n_col = rows.shape
    mu = np.empty(n_cand)
    gamma = np.empty(n_cand)
    gram32 = gram.astype(np.float32)
    diag = (np.arange(n_col), np.arange(n_col))
    pairs = n_col * (n_col - 1)
    for lo in range(0, n_cand, chunk):
        r = rows[lo : lo + chunk].astype(np.float32)
        with np.errstate(divide="ignore"):
            inv_t = 1.0 / np.sqrt(sq_norms.astype(np.float32)[None, :] + r**2)
        inv_t[~np.isfinite(inv_t)] = 0.0
        q = np.multiply(r[:, :, None], r[:, None, :])
        q += gram32[None, :, :]
        q *= inv_t[:, :, None]
        q *= inv_t[:, None, :]
        q[:, diag[0], diag[1]] = 0.0
        gamma[lo : lo + chunk] = np.einsum("cij,cij->c", q, q, dtype=np.float64) / pairs
        np.abs(q, out=q)
        mu[lo : lo + chunk] = q.reshape(q.shape[0], -1).max(axis=1)
    return mu, gamma


def greedy_l1_optimal(
    config: GreedyConfig,
    basis: MultiIndexSet,
    spec=None,
    seed: int = 0,
    chain_params: ChainParams | None = None,
) -> SampleSet:
    """Greedy row selection from a random candidate pool.

    Starts from a random pool row and adds, one at a time, the unused
    pool row whose addition scores best under the configured criterion.
    The returned point order is the selection order. The "d-coh" variant
    draws its pool coherence-optimally and keeps the importance weights.
    """
    rng = np.random.default_rng(seed)
    pool_seed = int(rng.integers(2**63))
    if config.criterion == "d-coh":
        pool = coherence_optimal(config.pool_size, basis, pool_seed, chain_params)
    else:
        pool = random_grid(config.pool_size, basis.d, pool_seed)
    rows = eval_basis_matrix(basis, 2.0 * pool.points - 1.0)
    if not np.allclose(pool.weights, 1.0):
        rows = pool.weights[:, None] * rows

    n_col = basis.n_basis
    available = np.ones(config.pool_size, dtype=bool)
    first = int(rng.integers(config.pool_size))
    order = [first]
    available[first] = False

    gram = np.outer(rows[first], rows[first])  # unnormalized column Gram
    sq_norms = rows[first] ** 2
    selected = rows[first][None, :]

    for step in range(1, config.target_size):
        cand_idx = np.flatnonzero(available)
        cand = rows[cand_idx]
        if config.criterion == "mc":
            scores = _mc_scan(gram, sq_norms, cand)
        elif config.criterion == "mc-cc":
            mu, gamma = _mc_cc_scan(gram, sq_norms, cand)
            scores = hybrid_score_values(mu, gamma)
        else:  # "d" / "d-coh": determinant growth while rank-deficient
            if step < n_col:
                row_gram = selected @ selected.T
                chol = np.linalg.cholesky(row_gram + 1e-12 * np.eye(step))
                proj = np.linalg.solve(chol, selected @ cand.T)
                schur = (cand**2).sum(axis=1) - (proj**2).sum(axis=0)
                scores = -schur
            else:
                col_gram = selected.T @ selected
                inv_quad = np.einsum(
                    "ij,ij->i", cand @ np.linalg.pinv(col_gram), cand
                )
                scores = -inv_quad
        best = cand_idx[int(np.argmin(scores))]
        order.append(int(best))
        available[best] = False
        gram += np.outer(rows[best], rows[best])
        sq_norms += rows[best] ** 2
        selected = np.vstack([selected, rows[best]])

    order = np.asarray(order)
    return SampleSet(pool.points[order], pool.weights[order], config.criterion, seed)
