"""Coupled-copy decay diagnostics with geometric-rate fits.

Every operation simulates pairs of paths that share all innovations from
period one onward but start from independently drawn presample states, then
measures how fast a chosen discrepancy dies off in the lag since the split.
A log-linear fit over the informative lags turns the per-lag estimates into
a geometric rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import map_blocks, merge_sums
from .errors import ConfigError
from .families import box_grid
from .models import DEFAULT_BURN_IN, simulate_coupled_embedded_batch

NOISE_FLOOR_SE = 5.0
TOO_FAST = "decay too fast to resolve"
MIN_DECAY_REPS = 1000


@dataclass(frozen=True, eq=False)
class DecayReport:
    """Per-lag discrepancy norms and the geometric rate fitted to them.

    Estimates are always norms (q-th root of the mean q-th power). The slope
    is fitted on log estimates for state coupling and on the log of the p-th
    power moment for function-difference reports; the latter makes alpha_hat
    comparable across norm orders for uniformly bounded families, whose
    moments of every order decay at the rate of the underlying flip
    probability. alpha_hat = exp(slope) either way, and r_squared is
    invariant to the choice of fitting scale.
    """

    lags: tuple
    norm_order: float
    estimates: np.ndarray
    std_errors: np.ndarray
    used_in_fit: np.ndarray
    slope: float
    intercept: float
    alpha_hat: float
    r_squared: float
    reps: int
    status: str


def _check_lags(lags):
    lags = tuple(int(lag) for lag in lags)
    if not lags or lags[0] < 1 or any(b <= a for a, b in zip(lags, lags[1:])):
        raise ValueError("lags must be strictly increasing integers >= 1")
    return lags


def _norm_and_se(moment_sum, square_sum, reps, order):
    """Norm estimates and delta-method errors from power sums."""
    mean = moment_sum / reps
    var = np.maximum(square_sum / reps - mean**2, 0.0) * reps / max(reps - 1, 1)
    se_mean = np.sqrt(var / reps)
    est = np.zeros_like(mean)
    se = np.zeros_like(mean)
    pos = mean > 0.0
    est[pos] = mean[pos] ** (1.0 / order)
    se[pos] = se_mean[pos] / (order * mean[pos] ** ((order - 1.0) / order))
    return est, se


def _frequency_norm_and_se(count, reps, order):
    freq = count / reps
    se_freq = np.sqrt(np.maximum(freq * (1.0 - freq), 0.0) / max(reps - 1, 1))
    est = freq ** (1.0 / order)
    se = np.zeros_like(freq)
    pos = freq > 0.0
    se[pos] = se_freq[pos] / (order * freq[pos] ** ((order - 1.0) / order))
    return est, se


def _fitted_report(lags, estimates, ses, norm_order, reps, fit_scale):
    est = np.asarray(estimates, dtype=float)
    se = np.asarray(ses, dtype=float)
    used = est > NOISE_FLOOR_SE * se
    nan = float("nan")
    if used.sum() < 2:
        return DecayReport(lags, norm_order, est, se, used, nan, nan, nan, nan, reps, TOO_FAST)
    x = np.asarray(lags, dtype=float)[used]
    y = fit_scale * np.log(est[used])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / sst if sst > 0.0 else 1.0
    return DecayReport(
        lags, norm_order, est, se, used, float(slope), float(intercept),
        math.exp(slope), r2, reps, "ok",
    )


def _coupled_lag_slices(model, embeddings, master_seed, block, lags, burn_in):
    orig, pert = simulate_coupled_embedded_batch(
        model, embeddings, master_seed, block, lags[-1], burn_in
    )
    idx = np.asarray(lags) - 1
    return orig[:, idx, :], pert[:, idx, :]


def coupling_norm(model, lags, q, reps, master_seed, *,
                  burn_in=DEFAULT_BURN_IN, threads=1, embeddings=()):
    """Per-lag q-norms of the coupled state discrepancy, with a rate fit.

    The fitted alpha_hat is the contraction factor of the norm itself.
    """
    if not q > 0:
        raise ValueError("q must be > 0")
    if reps < MIN_DECAY_REPS:
        raise ValueError(f"reps must be >= {MIN_DECAY_REPS}")
    lags = _check_lags(lags)

    def worker(block):
        a, b = _coupled_lag_slices(model, embeddings, master_seed, block, lags, burn_in)
        powed = np.linalg.norm(a - b, axis=2) ** q
        return powed.sum(axis=0), (powed**2).sum(axis=0)

    s1, s2 = merge_sums(map_blocks(worker, reps, threads))
    est, se = _norm_and_se(s1, s2, reps, q)
    return _fitted_report(lags, est, se, q, reps, fit_scale=1.0)


def _grid_moment_sums(family, grid, rows_a, rows_b, p, chunk=128):
    """Sums over replications of |f(a) - f(b)|^p and its square, per theta."""
    s1 = np.empty(len(grid))
    s2 = np.empty(len(grid))
    for start in range(0, len(grid), chunk):
        part = grid[start : start + chunk]
        gap = np.abs(
            np.asarray(family.evaluate_grid(part, rows_a), dtype=float)
            - family.evaluate_grid(part, rows_b)
        )
        if gap.ndim == 3:
            gap = gap.max(axis=2)
        powed = gap**p
        s1[start : start + chunk] = powed.sum(axis=1)
        s2[start : start + chunk] = (powed**2).sum(axis=1)
    return s1, s2


def family_coupling_norm(model, embeddings, family, theta_grid, lags, p, reps, master_seed, *,
                         burn_in=DEFAULT_BURN_IN, threads=1):
    """Sup over a parameter grid of per-member coupled p-norms, lag by lag."""
    if not p > 0:
        raise ValueError("p must be > 0")
    if reps < MIN_DECAY_REPS:
        raise ValueError(f"reps must be >= {MIN_DECAY_REPS}")
    lags = _check_lags(lags)
    grid = np.asarray(theta_grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    if len(grid) == 0:
        raise ValueError("theta grid must be nonempty")

    def worker(block):
        a, b = _coupled_lag_slices(model, embeddings, master_seed, block, lags, burn_in)
        s1 = np.empty((len(lags), len(grid)))
        s2 = np.empty((len(lags), len(grid)))
        for j in range(len(lags)):
            s1[j], s2[j] = _grid_moment_sums(family, grid, a[:, j, :], b[:, j, :], p)
        return s1, s2

    s1, s2 = merge_sums(map_blocks(worker, reps, threads))
    pick = np.argmax(s1, axis=1)
    take = np.arange(len(lags))
    est, se = _norm_and_se(s1[take, pick], s2[take, pick], reps, p)
    return _fitted_report(lags, est, se, p, reps, fit_scale=p)


def bracket_coupling_norm(model, embeddings, cover, lags, p, reps, master_seed, *,
                          burn_in=DEFAULT_BURN_IN, threads=1):
    """Max over a cover's bounding functions of coupled p-norms, lag by lag."""
    if not p > 0:
        raise ValueError("p must be > 0")
    if reps < MIN_DECAY_REPS:
        raise ValueError(f"reps must be >= {MIN_DECAY_REPS}")
    lags = _check_lags(lags)

    def worker(block):
        a, b = _coupled_lag_slices(model, embeddings, master_seed, block, lags, burn_in)
        s1 = np.zeros((len(lags), cover.size))
        s2 = np.zeros((len(lags), cover.size))
        for j in range(len(lags)):
            for k in range(cover.size):
                gap = np.abs(
                    np.asarray(cover.bounding_values(k, a[:, j, :]), dtype=float)
                    - cover.bounding_values(k, b[:, j, :])
                )
                powed = gap**p
                s1[j, k] = powed.sum()
                s2[j, k] = (powed**2).sum()
        return s1, s2

    s1, s2 = merge_sums(map_blocks(worker, reps, threads))
    pick = np.argmax(s1, axis=1)
    take = np.arange(len(lags))
    est, se = _norm_and_se(s1[take, pick], s2[take, pick], reps, p)
    return _fitted_report(lags, est, se, p, reps, fit_scale=p)


INDICATOR_CASES = ("singleton", "functional", "conditional-independent")


@dataclass(frozen=True)
class IndicatorCouplingSpec:
    """How to read (U, V, W) off embedded rows for threshold-crossing decay.

    `u_col` indexes the scalar level; V is either a tuple of row columns or,
    when `v_cols` is empty, the fixed vector `v_const`. W columns are used
    only to validate the declared case. The case names which structural
    hypothesis licences the diagnostic: a degenerate direction vector, a
    direction that is an exact function of W, or conditional independence of
    level and direction given W (declared, not checked).
    """

    u_col: int
    v_cols: tuple = ()
    v_const: tuple = (1.0,)
    w_cols: tuple = ()
    lam_box: tuple = ((-1.0, 1.0),)
    sense: str = "strict"
    case: str = "singleton"
    functional_map: object = None

    def __post_init__(self):
        if self.sense not in ("strict", "weak"):
            raise ValueError("sense must be 'strict' or 'weak'")
        if self.case not in INDICATOR_CASES:
            raise ValueError(f"case must be one of {INDICATOR_CASES}")
        object.__setattr__(self, "v_cols", tuple(int(c) for c in self.v_cols))
        object.__setattr__(self, "w_cols", tuple(int(c) for c in self.w_cols))
        object.__setattr__(self, "v_const", tuple(float(v) for v in self.v_const))
        box = tuple((float(lo), float(hi)) for lo, hi in self.lam_box)
        for lo, hi in box:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError("lam_box must be a finite box")
        object.__setattr__(self, "lam_box", box)
        if len(self.lam_box) != self.direction_dim:
            raise ValueError("lam_box dimension must match the direction dimension")
        if self.case == "functional" and (not self.v_cols or not self.w_cols
                                          or self.functional_map is None):
            raise ValueError("functional case needs v_cols, w_cols, and functional_map")

    @property
    def direction_dim(self):
        return len(self.v_cols) if self.v_cols else len(self.v_const)

    def directions(self, rows):
        if self.v_cols:
            return rows[:, list(self.v_cols)]
        return np.broadcast_to(
            np.asarray(self.v_const, dtype=float), (len(rows), self.direction_dim)
        )

    def validate_rows(self, rows):
        problems = []
        if self.case == "singleton" and self.v_cols:
            v = self.directions(rows)
            if not np.all(v == v[0]):
                problems.append("singleton case requires a constant direction vector")
        if self.case == "functional":
            v = self.directions(rows)
            mapped = np.asarray(self.functional_map(rows[:, list(self.w_cols)]), dtype=float)
            if mapped.shape != v.shape or not np.array_equal(mapped, v):
                problems.append("functional case requires V to equal the map of W on every draw")
        if problems:
            raise ConfigError(problems)


def indicator_coupling(model, spec, lags, p, reps, master_seed, *,
                       lam_grid=None, embeddings=(), burn_in=DEFAULT_BURN_IN,
                       threads=1, grid_per_dim=512):
    """Sup over a direction box of coupled threshold-crossing p-norms."""
    if not p > 0:
        raise ValueError("p must be > 0")
    if reps < MIN_DECAY_REPS:
        raise ValueError(f"reps must be >= {MIN_DECAY_REPS}")
    lags = _check_lags(lags)
    if lam_grid is None:
        per_dim = grid_per_dim if spec.direction_dim == 1 else 32
        lam_grid = box_grid(spec.lam_box, per_dim=per_dim)
    lam = np.asarray(lam_grid, dtype=float)
    if lam.ndim == 1:
        lam = lam[:, None]

    def crossings(rows, thresholds):
        u = rows[:, spec.u_col][:, None]
        return u < thresholds if spec.sense == "strict" else u <= thresholds

    def worker(block):
        a, b = _coupled_lag_slices(model, embeddings, master_seed, block, lags, burn_in)
        counts = np.zeros((len(lags), len(lam)))
        for j in range(len(lags)):
            ra, rb = a[:, j, :], b[:, j, :]
            spec.validate_rows(ra)
            spec.validate_rows(rb)
            flips = crossings(ra, spec.directions(ra) @ lam.T) \
                != crossings(rb, spec.directions(rb) @ lam.T)
            counts[j] = flips.sum(axis=0)
        return (counts,)

    (counts,) = merge_sums(map_blocks(worker, reps, threads))
    pick = np.argmax(counts, axis=1)
    take = np.arange(len(lags))
    est, se = _frequency_norm_and_se(counts[take, pick], reps, p)
    return _fitted_report(lags, est, se, p, reps, fit_scale=p)


def grid_refinement_gap(model, embeddings, family, lags, p, reps, master_seed, *,
                        per_dim=256, burn_in=DEFAULT_BURN_IN, threads=1):
    """Family decay at a grid and at its dyadic refinement, with the gap.

    The refined grid interleaves midpoints, so the refined sup can only gain;
    a gap within noise says the grid is dense enough for the sup.
    """
    coarse = family_coupling_norm(
        model, embeddings, family, box_grid(family.theta_box, per_dim),
        lags, p, reps, master_seed, burn_in=burn_in, threads=threads,
    )
    fine = family_coupling_norm(
        model, embeddings, family, box_grid(family.theta_box, 2 * per_dim - 1),
        lags, p, reps, master_seed, burn_in=burn_in, threads=threads,
    )
    gap = fine.estimates - coarse.estimates
    at = int(np.argmax(gap))
    return {
        "coarse": coarse,
        "fine": fine,
        "max_gap": float(gap[at]),
        "combined_se": float(math.hypot(coarse.std_errors[at], fine.std_errors[at])),
    }
