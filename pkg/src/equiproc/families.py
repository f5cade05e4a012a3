"""Parametric function families with their pseudometric and bracketing machinery.

A family is a compact box of parameters plus an evaluation rule bounded
uniformly by a constant. The module estimates the L2 pseudometric
rho(f - g) = ||f(xi_0) - g(xi_0)||_2 between members, builds bracketing
covers (centers with real-valued bounding functions of controlled rho-size),
counts them as a function of the scale, and integrates the resulting
complexity to decide whether the modulus experiment is allowed to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import CoverCapError
from .innovations import StreamKey

DEFAULT_RHO_REPS = 100_000
DEFAULT_GRID_PER_DIM = 512
DEFAULT_COVER_CAP = 10**7
_RHO_KEY = StreamKey(1_618_033_988, 0)


def _check_box(box):
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    for lo, hi in box:
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ValueError(f"parameter box entry ({lo}, {hi}) must be a finite interval")
    return box


def _scalar_param(theta):
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.shape != (1,):
        raise ValueError(f"expected a scalar parameter, got shape {arr.shape}")
    return float(arr[0])


@dataclass(frozen=True)
class Indicator:
    """f_theta(x) = 1{x < theta}."""

    theta_box: tuple = ((0.0, 1.0),)

    variant_name = "indicator"
    input_dim = 1
    output_dim = 1
    bound = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta_box", _check_box(self.theta_box))
        if len(self.theta_box) != 1:
            raise ValueError("indicator takes a one-dimensional parameter")

    def evaluate(self, theta, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != 1:
            raise ValueError("indicator expects scalar inputs")
        return float(x[0] < _scalar_param(theta))

    def evaluate_path(self, theta, rows):
        return (np.asarray(rows)[:, 0] < _scalar_param(theta)).astype(float)

    def evaluate_grid(self, thetas, rows):
        th = np.asarray(thetas, dtype=float).reshape(-1)
        return (np.asarray(rows)[:, 0][None, :] < th[:, None]).astype(float)


@dataclass(frozen=True)
class Sign:
    """f_theta(x) = sign(x - theta)."""

    theta_box: tuple = ((-1.0, 1.0),)

    variant_name = "sign"
    input_dim = 1
    output_dim = 1
    bound = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta_box", _check_box(self.theta_box))
        if len(self.theta_box) != 1:
            raise ValueError("sign takes a one-dimensional parameter")

    def evaluate(self, theta, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != 1:
            raise ValueError("sign expects scalar inputs")
        return float(np.sign(x[0] - _scalar_param(theta)))

    def evaluate_path(self, theta, rows):
        return np.sign(np.asarray(rows)[:, 0] - _scalar_param(theta))

    def evaluate_grid(self, thetas, rows):
        th = np.asarray(thetas, dtype=float).reshape(-1)
        return np.sign(np.asarray(rows)[:, 0][None, :] - th[:, None])


@dataclass(frozen=True)
class Huber:
    """Clipped-linear location score with clip level delta."""

    delta: float
    theta_box: tuple = ((-1.0, 1.0),)

    variant_name = "huber"
    input_dim = 1
    output_dim = 1

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError("huber clip level delta must be > 0")
        object.__setattr__(self, "theta_box", _check_box(self.theta_box))
        if len(self.theta_box) != 1:
            raise ValueError("huber takes a one-dimensional parameter")

    @property
    def bound(self):
        return self.delta

    def evaluate(self, theta, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != 1:
            raise ValueError("huber expects scalar inputs")
        return float(np.clip(x[0] - _scalar_param(theta), -self.delta, self.delta))

    def evaluate_path(self, theta, rows):
        return np.clip(np.asarray(rows)[:, 0] - _scalar_param(theta), -self.delta, self.delta)

    def evaluate_grid(self, thetas, rows):
        th = np.asarray(thetas, dtype=float).reshape(-1)
        return np.clip(np.asarray(rows)[:, 0][None, :] - th[:, None], -self.delta, self.delta)


@dataclass(frozen=True)
class Quantilogram:
    """f_theta(x1, x2) = (alpha - 1{x1 < theta})(alpha - 1{x2 < theta})."""

    alpha: float
    theta_box: tuple = ((-2.0, 2.0),)

    variant_name = "quantilogram"
    input_dim = 2
    output_dim = 1
    bound = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "theta_box", _check_box(self.theta_box))
        if len(self.theta_box) != 1:
            raise ValueError("quantilogram takes a one-dimensional parameter")

    def evaluate(self, theta, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != 2:
            raise ValueError("quantilogram expects paired inputs")
        t = _scalar_param(theta)
        return float((self.alpha - (x[0] < t)) * (self.alpha - (x[1] < t)))

    def evaluate_path(self, theta, rows):
        rows = np.asarray(rows)
        t = _scalar_param(theta)
        return (self.alpha - (rows[:, 0] < t)) * (self.alpha - (rows[:, 1] < t))

    def evaluate_grid(self, thetas, rows):
        rows = np.asarray(rows)
        th = np.asarray(thetas, dtype=float).reshape(-1)[:, None]
        a = self.alpha - (rows[:, 0][None, :] < th)
        b = self.alpha - (rows[:, 1][None, :] < th)
        return a * b


@dataclass(frozen=True)
class DominancePair:
    """f_theta(x1, x2) = 1{x1 <= theta} - 1{x2 <= theta}."""

    theta_box: tuple = ((-3.0, 3.0),)

    variant_name = "dominance-pair"
    input_dim = 2
    output_dim = 1
    bound = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta_box", _check_box(self.theta_box))
        if len(self.theta_box) != 1:
            raise ValueError("dominance-pair takes a one-dimensional parameter")

    def evaluate(self, theta, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size != 2:
            raise ValueError("dominance-pair expects paired inputs")
        t = _scalar_param(theta)
        return float((x[0] <= t) * 1.0 - (x[1] <= t))

    def evaluate_path(self, theta, rows):
        rows = np.asarray(rows)
        t = _scalar_param(theta)
        return (rows[:, 0] <= t).astype(float) - (rows[:, 1] <= t)

    def evaluate_grid(self, thetas, rows):
        rows = np.asarray(rows)
        th = np.asarray(thetas, dtype=float).reshape(-1)[:, None]
        return (rows[:, 0][None, :] <= th).astype(float) - (rows[:, 1][None, :] <= th)


@dataclass(frozen=True)
class DominanceResidual:
    """Two-sample dominance indicators on regression residuals.

    Parameter is (theta, eta_1, eta_2); inputs are rows
    (y1, z1..., y2, z2...) and the member value is
    1{y1 <= z1 . eta_1 + theta} - 1{y2 <= z2 . eta_2 + theta}.
    """

    z_dim: int
    theta_box: tuple

    variant_name = "dominance-residual"
    output_dim = 1
    bound = 1.0

    def __post_init__(self):
        if self.z_dim < 1:
            raise ValueError("z_dim must be >= 1")
        object.__setattr__(self, "theta_box", _check_box(self.theta_box))
        if len(self.theta_box) != 1 + 2 * self.z_dim:
            raise ValueError(
                f"parameter box must have {1 + 2 * self.z_dim} coordinates (theta, eta_1, eta_2)"
            )

    @property
    def input_dim(self):
        return 2 * (1 + self.z_dim)

    def _split(self, param):
        p = np.asarray(param, dtype=float).reshape(-1)
        if p.size != 1 + 2 * self.z_dim:
            raise ValueError(f"expected parameter of length {1 + 2 * self.z_dim}, got {p.size}")
        return p[0], p[1 : 1 + self.z_dim], p[1 + self.z_dim :]

    def _columns(self, rows):
        rows = np.asarray(rows)
        if rows.shape[1] != self.input_dim:
            raise ValueError(f"expected rows of width {self.input_dim}, got {rows.shape[1]}")
        zd = self.z_dim
        return rows[:, 0], rows[:, 1 : 1 + zd], rows[:, 1 + zd], rows[:, 2 + zd :]

    def evaluate(self, param, x):
        return float(self.evaluate_path(param, np.asarray(x, dtype=float)[None, :])[0])

    def evaluate_path(self, param, rows):
        theta, eta1, eta2 = self._split(param)
        y1, z1, y2, z2 = self._columns(rows)
        return (y1 <= z1 @ eta1 + theta).astype(float) - (y2 <= z2 @ eta2 + theta)

    def evaluate_grid(self, params, rows):
        params = np.asarray(params, dtype=float)
        y1, z1, y2, z2 = self._columns(rows)
        zd = self.z_dim
        th = params[:, 0]
        c1 = z1 @ params[:, 1 : 1 + zd].T + th[None, :]
        c2 = z2 @ params[:, 1 + zd :].T + th[None, :]
        return ((y1[:, None] <= c1).astype(float) - (y2[:, None] <= c2)).T


@dataclass(frozen=True)
class CensoredQR:
    """Censored quantile-regression scores z 1{t <= c} 1{t <= z . theta}.

    Vector-valued: one coordinate per covariate, each bounded by delta_z.
    Diagnostics reduce over coordinates with a max.
    """

    z_dim: int
    delta_z: float
    theta_box: tuple

    variant_name = "censored-qr"

    def __post_init__(self):
        if self.z_dim < 1:
            raise ValueError("z_dim must be >= 1")
        if not self.delta_z > 0.0:
            raise ValueError("delta_z must be > 0")
        object.__setattr__(self, "theta_box", _check_box(self.theta_box))
        if len(self.theta_box) != self.z_dim:
            raise ValueError(f"parameter box must have {self.z_dim} coordinates")

    @property
    def input_dim(self):
        return 2 + self.z_dim

    @property
    def output_dim(self):
        return self.z_dim

    @property
    def bound(self):
        return self.delta_z

    def _columns(self, rows):
        rows = np.asarray(rows)
        if rows.shape[1] != self.input_dim:
            raise ValueError(f"expected rows of width {self.input_dim}, got {rows.shape[1]}")
        return rows[:, 0], rows[:, 1], rows[:, 2:]

    def evaluate(self, theta, x):
        return self.evaluate_path(theta, np.asarray(x, dtype=float)[None, :])[0]

    def evaluate_path(self, theta, rows):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.z_dim:
            raise ValueError(f"expected parameter of length {self.z_dim}, got {theta.size}")
        t, c, z = self._columns(rows)
        keep = (t <= c) & (t <= z @ theta)
        return z * keep[:, None].astype(float)

    def evaluate_grid(self, thetas, rows):
        thetas = np.asarray(thetas, dtype=float)
        t, c, z = self._columns(rows)
        keep = (t[:, None] <= z @ thetas.T) & (t <= c)[:, None]
        return (z[:, None, :] * keep[:, :, None]).transpose(1, 0, 2)


FAMILY_VARIANTS = {
    cls.variant_name: cls
    for cls in (Indicator, Sign, Huber, Quantilogram, DominancePair, DominanceResidual, CensoredQR)
}


def box_grid(box, per_dim=DEFAULT_GRID_PER_DIM, cap=DEFAULT_COVER_CAP):
    """Deterministic cartesian grid over a parameter box, shape (G, dims).

    Singleton coordinates contribute a single point; the first coordinate
    varies slowest.
    """
    box = _check_box(box)
    axes = [
        np.array([lo]) if lo == hi else np.linspace(lo, hi, per_dim) for lo, hi in box
    ]
    total = math.prod(len(a) for a in axes)
    if total > cap:
        raise CoverCapError(f"grid of {total} points exceeds the cap of {cap}")
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def default_theta_grid(family, per_dim=DEFAULT_GRID_PER_DIM):
    return box_grid(family.theta_box, per_dim)


# ---------------------------------------------------------------------------
# rho pseudometric


@dataclass(frozen=True)
class RhoMetricEstimate:
    value: float
    std_error: float
    method: str


def _coordinate_rms(diff):
    """Root mean squares; vector-valued members reduce by coordinatewise max."""
    d2 = np.asarray(diff, dtype=float) ** 2
    if d2.ndim == 1:
        d2 = d2[:, None]
    per_coord = d2.mean(axis=0)
    k = int(np.argmax(per_coord))
    return math.sqrt(per_coord[k]), d2[:, k]


def _batch_se(values, batches=100):
    values = np.asarray(values, dtype=float)
    chunks = np.array_split(values, min(batches, len(values)))
    means = np.array([c.mean() for c in chunks])
    if len(means) < 2:
        return 0.0
    return float(means.std(ddof=1) / math.sqrt(len(means)))


def _closed_form_rho(family, theta, theta_prime, law):
    kind = getattr(law, "kind", None)
    if kind not in ("uniform01", "gaussian"):
        return None
    name = family.variant_name
    if name not in ("indicator", "sign"):
        return None
    gap = abs(
        float(law.marginal_cdf(_scalar_param(theta)))
        - float(law.marginal_cdf(_scalar_param(theta_prime)))
    )
    root = math.sqrt(gap)
    return root if name == "indicator" else 2.0 * root


def rho(family, theta, theta_prime, law, reps=DEFAULT_RHO_REPS, key=None):
    """Estimate rho(f_theta - f_theta') under `law`.

    Exact for indicator-style members under the uniform and Gaussian laws;
    Monte Carlo otherwise, with batch-means standard errors so serially
    dependent stationary samplers are handled honestly.
    """
    if reps < 100:
        raise ValueError("reps must be >= 100")
    ta = np.atleast_1d(np.asarray(theta, dtype=float))
    tb = np.atleast_1d(np.asarray(theta_prime, dtype=float))
    if np.array_equal(ta, tb):
        return RhoMetricEstimate(0.0, 0.0, "closed-form")
    closed = _closed_form_rho(family, theta, theta_prime, law)
    if closed is not None:
        return RhoMetricEstimate(closed, 0.0, "closed-form")
    rows = law.sample(key if key is not None else _RHO_KEY, reps)
    diff = np.asarray(family.evaluate_path(theta, rows)) - family.evaluate_path(theta_prime, rows)
    value, d2 = _coordinate_rms(diff)
    se2 = _batch_se(d2)
    se = se2 / (2.0 * value) if value > 1e-12 else math.sqrt(se2)
    return RhoMetricEstimate(value, se, f"monte-carlo({reps})")


def rho_matrix(family, thetas, law, reps=DEFAULT_RHO_REPS, key=None, batches=100):
    """All pairwise rho estimates over a parameter grid in one pass.

    Returns (values, std_errors), both (G, G). Uses the Gram identity
    ||f_i - f_j||^2 = M_ii + M_jj - 2 M_ij on per-batch second-moment
    matrices, so the standard errors are batch means and remain valid for
    dependent rows. Scalar-valued families only.
    """
    if reps < 100:
        raise ValueError("reps must be >= 100")
    if getattr(family, "output_dim", 1) != 1:
        raise ValueError("rho_matrix expects a scalar-valued family")
    thetas = np.asarray(thetas, dtype=float)
    rows = law.sample(key if key is not None else _RHO_KEY, reps)
    G = len(thetas)
    splits = np.array_split(np.arange(len(rows)), batches)
    grams = np.empty((len(splits), G, G))
    total = np.zeros((G, G))
    for b, idx in enumerate(splits):
        F = np.asarray(family.evaluate_grid(thetas, rows[idx]), dtype=float)
        gram = F @ F.T
        grams[b] = gram / len(idx)
        total += gram
    total /= len(rows)
    diag = np.diag(total)
    sq = np.clip(diag[:, None] + diag[None, :] - 2.0 * total, 0.0, None)
    bdiag = grams[:, np.arange(G), np.arange(G)]
    bsq = bdiag[:, :, None] + bdiag[:, None, :] - 2.0 * grams
    se_sq = bsq.std(axis=0, ddof=1) / math.sqrt(len(splits))
    values = np.sqrt(sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        ses = np.where(values > 1e-12, se_sq / (2.0 * values), np.sqrt(se_sq))
    np.fill_diagonal(ses, 0.0)
    return values, ses


# ---------------------------------------------------------------------------
# Bracketing covers


@dataclass(frozen=True)
class MarginalInfo:
    """What the cover construction knows about the sampling law.

    Either a Lipschitz constant for the relevant (conditional) distribution
    functions, or a stationary sample to estimate one from. `design_bound`
    is a Euclidean bound for covariate vectors, needed by ball covers.
    """

    lipschitz: float | None = None
    sample: np.ndarray | None = None
    design_bound: float | None = None

    def lipschitz_constant(self, column=0):
        if self.lipschitz is not None:
            if not self.lipschitz > 0.0:
                raise ValueError("lipschitz must be > 0")
            return self.lipschitz
        if self.sample is None:
            raise ValueError("provide a Lipschitz constant or a sample to estimate it from")
        x = np.sort(np.asarray(self.sample, dtype=float).reshape(len(self.sample), -1)[:, column])
        # steepest slope of the empirical CDF across inner percentile knots
        ps = np.linspace(0.005, 0.995, 100)
        qs = np.quantile(x, ps)
        dq = np.diff(qs)
        keep = dq > 1e-12
        if not keep.any():
            raise ValueError("sample looks degenerate; cannot estimate a Lipschitz constant")
        return float((np.diff(ps)[keep] / dq[keep]).max())


@dataclass(frozen=True, eq=False)
class IntervalCover:
    """Grid cover of a one-parameter family; bracket k spans [edges[k], edges[k+1]].

    Centers sit at right endpoints. Bounding functions follow each variant's
    construction and are real-valued.
    """

    family: object
    delta: float
    edges: np.ndarray

    kind = "grid"

    @property
    def size(self):
        return len(self.edges) - 1

    @property
    def centers(self):
        return self.edges[1:][:, None]

    def assign(self, theta):
        t = _scalar_param(theta)
        lo, hi = self.edges[0], self.edges[-1]
        if not lo <= t <= hi:
            raise ValueError(f"theta {t} lies outside the covered interval [{lo}, {hi}]")
        return max(0, int(np.searchsorted(self.edges, t, side="left")) - 1)

    def center_values(self, k, rows):
        return self.family.evaluate_path(self.edges[k + 1], rows)

    def bounding_values(self, k, rows):
        rows = np.asarray(rows)
        lo, hi = self.edges[k], self.edges[k + 1]
        name = self.family.variant_name
        if name == "indicator":
            x = rows[:, 0]
            return ((lo <= x) & (x < hi)).astype(float)
        if name == "sign":
            x = rows[:, 0]
            return 2.0 * ((lo <= x) & (x <= hi))
        if name == "quantilogram":
            out = np.zeros(len(rows))
            for j in (0, 1):
                x = rows[:, j]
                out += (x < hi) - (x < lo).astype(float)
            return out
        if name == "dominance-pair":
            out = np.zeros(len(rows))
            for j in (0, 1):
                x = rows[:, j]
                out += ((lo < x) & (x <= hi)).astype(float)
            return out
        if name == "huber":
            return np.full(len(rows), min(hi - lo, 2.0 * self.family.delta))
        raise ValueError(f"no grid cover recipe for family {name!r}")


@dataclass(frozen=True, eq=False)
class BallCover:
    """Euclidean-ball cover for multi-parameter indicator families.

    Bounding functions are indicator bands around each center with width
    proportional to the radius; they are real-valued even when the family is
    vector-valued.
    """

    family: object
    delta: float
    centers: np.ndarray
    radius: float
    design_bound: float

    kind = "ball"

    @property
    def size(self):
        return len(self.centers)

    def assign(self, param):
        p = np.asarray(param, dtype=float).reshape(-1)
        d = np.linalg.norm(self.centers - p[None, :], axis=1)
        inside = np.flatnonzero(d <= self.radius * (1.0 + 1e-9))
        if len(inside):
            return int(inside[0])
        return int(np.argmin(d))

    def center_values(self, k, rows):
        return self.family.evaluate_path(self.centers[k], rows)

    def bounding_values(self, k, rows):
        rows = np.asarray(rows)
        name = self.family.variant_name
        c = self.centers[k]
        if name == "dominance-residual":
            fam = self.family
            theta, e1, e2 = fam._split(c)
            y1, z1, y2, z2 = fam._columns(rows)
            out = np.zeros(len(rows))
            for y, z, e in ((y1, z1, e1), (y2, z2, e2)):
                band = (np.linalg.norm(z, axis=1) + 1.0) * self.radius
                mid = z @ e + theta
                out += (y < mid + band) - (y <= mid - band).astype(float)
            return out
        if name == "censored-qr":
            t, _, z = self.family._columns(rows)
            band = self.design_bound * self.radius
            return self.family.delta_z * (np.abs(t - z @ c) <= band).astype(float)
        raise ValueError(f"no ball cover recipe for family {name!r}")


def _interval_spacing(family, delta, lipschitz):
    name = family.variant_name
    if name == "indicator":
        return delta**2 / lipschitz
    if name in ("sign", "quantilogram", "dominance-pair"):
        return delta**2 / (4.0 * lipschitz)
    if name == "huber":
        return delta
    raise ValueError(f"no grid cover recipe for family {name!r}")


def _ball_layout(family, delta, marginal):
    lipschitz = marginal.lipschitz_constant()
    name = family.variant_name
    if name == "dominance-residual":
        if marginal.design_bound is None:
            raise ValueError("dominance-residual covers need a design_bound in MarginalInfo")
        zbound = marginal.design_bound
        radius = delta**2 / (8.0 * lipschitz * (zbound + 1.0))
    elif name == "censored-qr":
        zbound = marginal.design_bound
        if zbound is None:
            zbound = math.sqrt(family.z_dim) * family.delta_z
        radius = delta**2 / (2.0 * lipschitz * zbound * family.delta_z**2)
    else:
        raise ValueError(f"no ball cover recipe for family {name!r}")
    dims = len(family.theta_box)
    spacing = 2.0 * radius / math.sqrt(dims)
    counts = [
        1 if hi == lo else max(1, math.ceil((hi - lo) / spacing)) for lo, hi in family.theta_box
    ]
    return radius, counts, zbound


def _cover_size(family, delta, marginal):
    """Bracket count and layout without materializing evaluators."""
    if delta <= 0.0:
        raise ValueError("delta must be > 0")
    name = family.variant_name
    if name in ("dominance-residual", "censored-qr"):
        radius, counts, zbound = _ball_layout(family, delta, marginal)
        return {"kind": "ball", "count": math.prod(counts), "radius": radius,
                "counts": counts, "zbound": zbound}
    (lo, hi), = family.theta_box
    span = hi - lo
    if span == 0.0:
        return {"kind": "grid", "count": 1, "spacing": 0.0}
    if name == "huber" and 2.0 * family.delta <= delta:
        # one bracket spans the family: every member pair differs by <= 2 delta
        return {"kind": "grid", "count": 1, "spacing": span}
    spacing = _interval_spacing(family, delta, marginal.lipschitz_constant())
    count = max(1, math.ceil(span / spacing))
    return {"kind": "grid", "count": count, "spacing": spacing}


def bracketing_number(family, delta, marginal, cap=DEFAULT_COVER_CAP):
    """N(delta): how many brackets the recipe needs at scale delta."""
    size = _cover_size(family, delta, marginal)
    if size["count"] > cap:
        raise CoverCapError(
            f"bracketing at delta={delta} needs {size['count']} brackets, above the cap {cap}"
        )
    return size["count"]


def bracket_count_fn(family, marginal):
    """Uncapped N(x) as a plain function, suitable for the complexity integral."""

    def count(x):
        return float(_cover_size(family, x, marginal)["count"])

    return count


def build_cover(family, delta, marginal, cap=DEFAULT_COVER_CAP):
    """Materialize the bracketing cover at scale delta."""
    size = _cover_size(family, delta, marginal)
    if size["count"] > cap:
        raise CoverCapError(
            f"cover at delta={delta} needs {size['count']} brackets, above the cap {cap}"
        )
    if size["kind"] == "grid":
        (lo, hi), = family.theta_box
        edges = np.linspace(lo, hi, size["count"] + 1)
        return IntervalCover(family, delta, edges)
    counts = size["counts"]
    axes = [
        np.array([(lo + hi) / 2.0]) if lo == hi
        else lo + (np.arange(c) + 0.5) * (hi - lo) / c
        for (lo, hi), c in zip(family.theta_box, counts)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.reshape(-1) for m in mesh], axis=1)
    return BallCover(family, delta, centers, size["radius"], size["zbound"])


@dataclass(frozen=True, eq=False)
class CoverCheck:
    passed: bool
    worst_domination_margin: float
    worst_size_margin: float
    sizes: np.ndarray
    size_ses: np.ndarray


def verify_cover(cover, sample, theta_grid, tol=1e-9):
    """Check both cover invariants on a sample.

    Domination: |f_theta - f_center| <= b_k pointwise over the sampled inputs
    and the supplied parameter grid. Size: rho(b_k) <= delta + 3 SE for every
    bracket, with batch-means errors.
    """
    sample = np.asarray(sample, dtype=float)
    grid = np.asarray(theta_grid, dtype=float)
    if grid.ndim == 1:
        grid = grid[:, None]
    worst_dom = -math.inf
    for theta in grid:
        param = theta if theta.size > 1 else float(theta[0])
        k = cover.assign(param)
        diff = np.asarray(cover.family.evaluate_path(param, sample)) - cover.center_values(k, sample)
        gap = np.abs(diff)
        if gap.ndim == 2:
            gap = gap.max(axis=1)
        worst_dom = max(worst_dom, float((gap - cover.bounding_values(k, sample)).max()))
    sizes = np.empty(cover.size)
    ses = np.empty(cover.size)
    worst_size = -math.inf
    for k in range(cover.size):
        b = np.asarray(cover.bounding_values(k, sample), dtype=float)
        sizes[k] = math.sqrt(float((b**2).mean()))
        se2 = _batch_se(b**2)
        ses[k] = se2 / (2.0 * sizes[k]) if sizes[k] > 1e-12 else math.sqrt(se2)
        worst_size = max(worst_size, sizes[k] - (cover.delta + 3.0 * ses[k]))
    passed = worst_dom <= tol and worst_size <= tol
    return CoverCheck(passed, worst_dom, worst_size, sizes, ses)


# ---------------------------------------------------------------------------
# Complexity integral


@dataclass(frozen=True)
class BracketingIntegral:
    value: float | None
    divergent: bool
    exponent: float


def bracketing_integral(count_fn, gamma, Q, epsabs=1e-10):
    """Integrate x^(-gamma/(2+gamma)) N(x)^(1/Q) over (0, 1].

    The small-x power of the integrand is estimated first; at or below -1 the
    integral is reported divergent without quadrature. Otherwise the x = u^m
    substitution flattens the endpoint singularity before adaptive
    quadrature.
    """
    if not gamma > 0.0:
        raise ValueError("gamma must be > 0")
    if Q < 2 or Q % 2 != 0:
        raise ValueError("Q must be an even integer >= 2")
    base = -gamma / (2.0 + gamma)
    n_a, n_b = float(count_fn(1e-5)), float(count_fn(1e-7))
    if not (n_a > 0.0 and n_b > 0.0 and math.isfinite(n_a) and math.isfinite(n_b)):
        raise ValueError("count function must be positive and finite near 0")
    slope = (math.log(n_a) - math.log(n_b)) / (math.log(1e-5) - math.log(1e-7))
    exponent = base + slope / Q
    if exponent <= -1.0 + 1e-12:
        return BracketingIntegral(None, True, exponent)
    m = min(12, max(3, math.ceil(2.0 / (1.0 + exponent))))

    def integrand(u):
        x = u**m
        return m * u ** (m - 1) * x**base * float(count_fn(x)) ** (1.0 / Q)

    # full_output keeps quad quiet on staircase counts, where the last digits
    # are not attainable anyway; smooth counts still converge to epsabs
    out = integrate.quad(integrand, 0.0, 1.0, epsabs=epsabs, limit=300, full_output=1)
    return BracketingIntegral(float(out[0]), False, exponent)
