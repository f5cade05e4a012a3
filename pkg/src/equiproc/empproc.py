"""Scaled centered sample averages and their uniform increments.

The core object is nu_n f: the root-n scaled, mean-centered average of a
family member over a path. The experiments here measure how large the
increments nu_n(f - g) can get uniformly over pairs that are close in the
L2 pseudometric, estimate exceedance frequencies, and compare raw moments
against the tau-scaled polynomial bound they are supposed to obey. The
modulus experiment refuses to run when the complexity integral diverges.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from ._parallel import map_blocks, merge_sums
from .errors import ComplexityGateError
from .families import MarginalInfo, bracket_count_fn, bracketing_integral, rho, rho_matrix
from .models import (
    DEFAULT_BURN_IN,
    ORACLE_SEED,
    StationaryLaw,
    _closed_form_mean,
    simulate_embedded_batch,
    stationary_marginal,
)

PILOT_REPS = 100_000
ORACLE_PATH_LENGTH = 100_000


def nu_n(family, theta, rows, mean):
    """Root-n scaled, centered average of a member over path rows."""
    rows = np.asarray(rows)
    if len(rows) < 1:
        raise ValueError("path must contain at least one row")
    vals = np.asarray(family.evaluate_path(theta, rows), dtype=float)
    out = (vals.sum(axis=0) - len(rows) * np.asarray(mean)) / math.sqrt(len(rows))
    return float(out) if np.ndim(out) == 0 else out


def _as_grid(theta_grid):
    grid = np.asarray(theta_grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    if len(grid) == 0:
        raise ValueError("theta grid must be nonempty")
    return grid


def _grid_path_sums(family, grid, paths, theta_chunk=48, row_chunk=96):
    """Per-replication sums of each member over its path: (R, G)."""
    R, n, _ = paths.shape
    out = np.empty((R, len(grid)))
    for r0 in range(0, R, row_chunk):
        part = paths[r0 : r0 + row_chunk]
        flat = part.reshape(-1, part.shape[2])
        for g0 in range(0, len(grid), theta_chunk):
            vals = np.asarray(family.evaluate_grid(grid[g0 : g0 + theta_chunk], flat), dtype=float)
            sums = vals.reshape(vals.shape[0], len(part), n).sum(axis=2)
            out[r0 : r0 + row_chunk, g0 : g0 + theta_chunk] = sums.T
    return out


_mean_lock = threading.Lock()
_mean_cache = {}
_oracle_path_cache = {}


def _oracle_path(model, embeddings, length):
    key = (model, embeddings, length)
    with _mean_lock:
        cached = _oracle_path_cache.get(key)
    if cached is not None:
        return cached
    block = simulate_embedded_batch(model, embeddings, ORACLE_SEED, [0], length, DEFAULT_BURN_IN)
    with _mean_lock:
        _oracle_path_cache[key] = block[0]
    return block[0]


def stationary_means(family, theta_grid, model, embeddings=(), length=ORACLE_PATH_LENGTH):
    """Long-run member means over a parameter grid, closed form when known.

    Parameters without a closed form share one cached long-path time average.
    """
    grid = _as_grid(theta_grid)
    embeddings = tuple(embeddings)
    key = (family, model, embeddings, grid.tobytes(), length)
    with _mean_lock:
        cached = _mean_cache.get(key)
    if cached is not None:
        return cached
    means = np.empty(len(grid))
    missing = []
    for i, theta in enumerate(grid):
        param = theta if theta.size > 1 else float(theta[0])
        value = _closed_form_mean(model, family, param, embeddings)
        if value is None:
            missing.append(i)
        else:
            means[i] = value
    if missing:
        path = _oracle_path(model, embeddings, length)
        sums = _grid_path_sums(family, grid[missing], path[None, :, :])
        means[missing] = sums[0] / len(path)
    with _mean_lock:
        _mean_cache[key] = means
    return means


_pilot_lock = threading.Lock()
_pilot_cache = {}


def pilot_rho(family, theta_grid, law, reps=PILOT_REPS):
    """Cached all-pairs pseudometric estimates used to qualify pairs."""
    grid = _as_grid(theta_grid)
    key = (family, law, grid.tobytes(), reps)
    with _pilot_lock:
        cached = _pilot_cache.get(key)
    if cached is not None:
        return cached
    values, ses = rho_matrix(family, grid, law, reps=reps)
    with _pilot_lock:
        _pilot_cache[key] = (values, ses)
    return values, ses


def qualified_pairs(values, ses, delta):
    """Index pairs i<j whose pseudometric sits below delta with margin.

    A pair qualifies when rho_hat + 2 SE < delta, so noisy borderline pairs
    stay out rather than churn in and out across deltas.
    """
    G = values.shape[0]
    ii, jj = np.triu_indices(G, k=1)
    keep = values[ii, jj] + 2.0 * ses[ii, jj] < delta
    return ii[keep], jj[keep]


def stationary_marginal_info(model, embeddings=(), sample_length=50_000):
    """Cover-sizing inputs for the stationary law of the embedded series."""
    law = stationary_marginal(model)
    if law is not None:
        return MarginalInfo(lipschitz=law.marginal_lipschitz())
    path = _oracle_path(model, tuple(embeddings), sample_length)
    return MarginalInfo(sample=np.asarray(path[:, 0]))


@dataclass(frozen=True, eq=False)
class ModulusReport:
    """Per-delta Q-th moments of the pair-uniform increment, with exceedances."""

    deltas: tuple
    eta: float
    n: int
    Q: int
    gamma: float
    estimates: np.ndarray
    std_errors: np.ndarray
    exceed_freqs: np.ndarray
    pair_counts: np.ndarray
    reps: int

    @property
    def no_pairs(self):
        return self.pair_counts == 0


@dataclass(frozen=True, eq=False)
class ProbeReport:
    """Exceedance frequencies of the pair-uniform increment per (n, delta)."""

    deltas: tuple
    eta: float
    ns: tuple
    freqs: np.ndarray
    pair_counts: np.ndarray
    reps: int


@dataclass(frozen=True, eq=False)
class MomentScalingReport:
    """Raw increment moments against the tau-polynomial scaling bound."""

    pairs: tuple
    rho_values: np.ndarray
    taus: np.ndarray
    n: int
    Q: int
    gamma: float
    moments: np.ndarray
    moment_ses: np.ndarray
    ratios: np.ndarray
    reps: int

    @property
    def max_ratio(self):
        return float(self.ratios.max()) if len(self.ratios) else 0.0


def _check_orders(Q, gamma):
    if int(Q) != Q or Q < 2 or Q % 2 != 0:
        raise ValueError("Q must be an even integer >= 2")
    if not gamma > 0.0:
        raise ValueError("gamma must be > 0")
    return int(Q), float(gamma)


def _sup_pass(family, model, embeddings, grid, pair_sets, n, eta, powers,
              reps, master_seed, burn_in, threads):
    """Shared engine: per-delta power sums and exceedance counts of the sup."""
    mu = stationary_means(family, grid, model, embeddings)
    root_n = math.sqrt(n)
    D = len(pair_sets)

    def worker(block):
        paths = simulate_embedded_batch(model, embeddings, master_seed, block, n, burn_in)
        nu = _grid_path_sums(family, grid, paths) / root_n - root_n * mu[None, :]
        power_sums = np.zeros((D, len(powers)))
        exceed = np.zeros(D)
        for d, (ii, jj) in enumerate(pair_sets):
            if len(ii) == 0:
                continue
            sup = np.abs(nu[:, ii] - nu[:, jj]).max(axis=1)
            power_sums[d] = [(sup**p).sum() for p in powers]
            exceed[d] = (sup > eta).sum()
        return power_sums, exceed

    power_sums, exceed = merge_sums(map_blocks(worker, reps, threads))
    return power_sums, exceed


def modulus_experiment(family, model, embeddings, deltas, n, Q, gamma, reps,
                       theta_grid, master_seed, *, eta=0.5,
                       burn_in=DEFAULT_BURN_IN, threads=1,
                       pilot_reps=PILOT_REPS, marginal=None):
    """Q-th moment of the sup over rho-close pairs of |nu_n(f - g)|, per delta.

    Runs only when the complexity integral for the family converges at
    (gamma, Q); a divergent integral is a hard refusal, since the moment
    bound this experiment probes is not even asserted there.
    """
    Q, gamma = _check_orders(Q, gamma)
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    deltas = tuple(float(d) for d in deltas)
    if any(d <= 0 for d in deltas):
        raise ValueError("deltas must be > 0")
    grid = _as_grid(theta_grid)
    if marginal is None:
        marginal = stationary_marginal_info(model, embeddings)
    gate = bracketing_integral(bracket_count_fn(family, marginal), gamma, Q)
    if gate.divergent:
        raise ComplexityGateError(
            "complexity integral diverges at "
            f"(gamma={gamma}, Q={Q}): integrand power {gate.exponent:.4f} <= -1; "
            "the uniform-increment moment bound does not apply"
        )
    law = StationaryLaw(model, tuple(embeddings), burn_in=burn_in)
    values, ses = pilot_rho(family, grid, law, pilot_reps)
    pair_sets = [qualified_pairs(values, ses, d) for d in deltas]
    power_sums, exceed = _sup_pass(
        family, model, tuple(embeddings), grid, pair_sets, n, eta,
        (Q, 2 * Q), reps, master_seed, burn_in, threads,
    )
    mean_q = power_sums[:, 0] / reps
    var_q = np.maximum(power_sums[:, 1] / reps - mean_q**2, 0.0) * reps / max(reps - 1, 1)
    return ModulusReport(
        deltas, float(eta), int(n), Q, gamma,
        mean_q, np.sqrt(var_q / reps), exceed / reps,
        np.array([len(ii) for ii, _ in pair_sets]), int(reps),
    )


def equicontinuity_probe(family, model, embeddings, deltas, eta, ns, reps,
                         theta_grid, master_seed, *, burn_in=DEFAULT_BURN_IN,
                         threads=1, pilot_reps=PILOT_REPS):
    """Exceedance frequencies of the pair-uniform increment over (n, delta)."""
    deltas = tuple(float(d) for d in deltas)
    ns = tuple(int(n) for n in ns)
    if any(d <= 0 for d in deltas) or any(n < 1 for n in ns) or reps < 1:
        raise ValueError("deltas must be > 0, ns >= 1, reps >= 1")
    grid = _as_grid(theta_grid)
    law = StationaryLaw(model, tuple(embeddings), burn_in=burn_in)
    values, ses = pilot_rho(family, grid, law, pilot_reps)
    pair_sets = [qualified_pairs(values, ses, d) for d in deltas]
    freqs = np.empty((len(ns), len(deltas)))
    for row, n in enumerate(ns):
        _, exceed = _sup_pass(
            family, model, tuple(embeddings), grid, pair_sets, n, eta,
            (), reps, master_seed, burn_in, threads,
        )
        freqs[row] = exceed / reps
    return ProbeReport(
        deltas, float(eta), ns, freqs,
        np.array([len(ii) for ii, _ in pair_sets]), int(reps),
    )


def tau_scale(rho_value, gamma):
    return float(rho_value) ** (2.0 / (2.0 + gamma))


def scaling_denominator(tau, n, Q):
    powers = sum((tau**2 * n) ** j for j in range(1, Q // 2 + 1))
    return n ** (-Q / 2.0) * powers


def moment_scaling(family, model, embeddings, pairs, n, Q, gamma, reps,
                   master_seed, *, law=None, mean_fn=None,
                   burn_in=DEFAULT_BURN_IN, threads=1, pilot_reps=PILOT_REPS):
    """Raw Q-th moments of nu_n(f - g) for named pairs, against the tau bound.

    `mean_fn` may supply exact member means; otherwise the stationary mean
    oracle centers each member.
    """
    Q, gamma = _check_orders(Q, gamma)
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be >= 1")
    pairs = tuple((np.atleast_1d(np.asarray(a, dtype=float)),
                   np.atleast_1d(np.asarray(b, dtype=float))) for a, b in pairs)
    if not pairs:
        raise ValueError("pairs must be nonempty")
    embeddings = tuple(embeddings)
    if law is None:
        law = StationaryLaw(model, embeddings, burn_in=burn_in)
    flat = [p for pair in pairs for p in pair]
    grid = np.vstack(flat)
    uniq, inverse = np.unique(grid, axis=0, return_inverse=True)
    a_idx = inverse[0::2]
    b_idx = inverse[1::2]

    def as_param(t):
        return float(t[0]) if t.size == 1 else t

    rho_values = np.array([
        rho(family, as_param(a), as_param(b), law, reps=pilot_reps).value for a, b in pairs
    ])
    taus = np.array([tau_scale(r, gamma) for r in rho_values])

    if mean_fn is None:
        mu = stationary_means(family, uniq, model, embeddings)
    else:
        mu = np.array([float(mean_fn(t if t.size > 1 else float(t[0]))) for t in uniq])
    root_n = math.sqrt(n)

    def worker(block):
        paths = simulate_embedded_batch(model, embeddings, master_seed, block, n, burn_in)
        nu = _grid_path_sums(family, uniq, paths) / root_n - root_n * mu[None, :]
        gap = np.abs(nu[:, a_idx] - nu[:, b_idx])
        powed = gap**Q
        return powed.sum(axis=0), (powed**2).sum(axis=0)

    s1, s2 = merge_sums(map_blocks(worker, reps, threads))
    moments = s1 / reps
    var = np.maximum(s2 / reps - moments**2, 0.0) * reps / max(reps - 1, 1)
    denom = np.array([scaling_denominator(t, n, Q) for t in taus])
    ratios = np.where(denom > 0.0, moments / np.where(denom > 0.0, denom, 1.0), 0.0)
    pair_labels = tuple(
        (tuple(a.tolist()), tuple(b.tolist())) for a, b in pairs
    )
    return MomentScalingReport(
        pair_labels, rho_values, taus, int(n), Q, gamma,
        moments, np.sqrt(var / reps), ratios, int(reps),
    )
