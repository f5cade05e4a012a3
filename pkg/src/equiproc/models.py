"""Nonlinear autoregressive processes in causal form.

Each model maps an iid innovation sequence to a scalar series through a
one-step state recursion, so a trajectory is a deterministic function of its
stream key. Stationarity is approximated by a burn-in; every variant checks a
sufficient moment-contraction condition at construction and refuses parameter
points outside it.

The module also builds coupled trajectory pairs that share all innovations
from period 1 on but start from independently burned-in states, lifts scalar
series into vector observations (lagged pairs, independent replicas, censored
triples, regression designs), and supplies stationary laws plus long-run mean
oracles for downstream centering.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ContractionError
from .innovations import (
    AUX_TAG,
    PRESAMPLE_TAG,
    InnovationSpec,
    StreamKey,
    check_replication_id,
    derive_stream,
    draw,
    uniform_stream,
)

# Fixed stream for Monte Carlo contraction checks: the check must be a pure
# function of the model parameters, so it cannot share user streams.
_CHECK_KEY = StreamKey(271_828_182, 0)
_CHECK_REPS = 200_000

# Fixed stream for long-path stationary-mean oracles, for the same reason.
ORACLE_SEED = 3_141_592_653

DEFAULT_BURN_IN = 2000


def _mc_contraction_factor(spec: InnovationSpec, factor):
    """Estimate E factor(eps) from the dedicated check stream; returns (est, se)."""
    eps = draw(derive_stream(spec, _CHECK_KEY), _CHECK_REPS)
    vals = factor(eps)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))


def _require_factor_below_one(est, se, what):
    # est + 3*se < 1 so a pass is not a noise artifact
    if not est + 3.0 * se < 1.0:
        raise ContractionError(f"{what}: contraction factor {est:.4f} (se {se:.1e}) is not below 1")


@dataclass(frozen=True)
class AR1:
    """X_i = phi X_{i-1} + sigma eps_i with |phi| < 1."""

    phi: float
    sigma: float
    innovation: InnovationSpec = InnovationSpec("standard-normal")

    variant_name = "ar1"
    state_dim = 1
    draws_per_step = 1

    def __post_init__(self):
        if not abs(self.phi) < 1.0:
            raise ContractionError(f"AR1 requires |phi| < 1, got {self.phi}")
        if not self.sigma > 0.0:
            raise ValueError(f"AR1 requires sigma > 0, got {self.sigma}")

    def init_state(self, count):
        return np.zeros((count, 1))

    def step(self, state, eps):
        return (self.phi * state[:, 0] + self.sigma * eps[:, 0])[:, None]


@dataclass(frozen=True)
class ARCH1:
    """X_i = eps_i sqrt(omega + a1 X_{i-1}^2), contracting when a1^{q/2} E|eps|^q < 1."""

    omega: float
    a1: float
    q: float = 2.0
    innovation: InnovationSpec = InnovationSpec("standard-normal")

    variant_name = "arch1"
    state_dim = 1
    draws_per_step = 1

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError(f"ARCH1 requires omega > 0, got {self.omega}")
        if self.a1 < 0.0:
            raise ValueError(f"ARCH1 requires a1 >= 0, got {self.a1}")
        if not self.q > 0.0:
            raise ValueError("ARCH1 requires q > 0")
        factor = self.a1 ** (self.q / 2.0) * self.innovation.abs_moment(self.q)
        if not factor < 1.0:
            raise ContractionError(
                f"ARCH1: a1^(q/2) E|eps|^q = {factor:.4f} at q={self.q} is not below 1"
            )

    def init_state(self, count):
        return np.zeros((count, 1))

    def step(self, state, eps):
        return (eps[:, 0] * np.sqrt(self.omega + self.a1 * state[:, 0] ** 2))[:, None]


@dataclass(frozen=True)
class GARCH11:
    """X_i = s_i eps_i, s_i^2 = omega + a X_{i-1}^2 + b s_{i-1}^2.

    Contraction requires E (a eps^2 + b)^{q/2} < 1; closed form at q=2,
    Monte Carlo on a fixed internal stream otherwise.
    """

    omega: float
    a: float
    b: float
    q: float = 2.0
    innovation: InnovationSpec = InnovationSpec("standard-normal")

    variant_name = "garch11"
    state_dim = 2
    draws_per_step = 1

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError(f"GARCH11 requires omega > 0, got {self.omega}")
        if self.a < 0.0 or self.b < 0.0:
            raise ValueError("GARCH11 requires a >= 0 and b >= 0")
        if not self.q > 0.0:
            raise ValueError("GARCH11 requires q > 0")
        if self.q == 2.0:
            factor = self.a * self.innovation.second_moment() + self.b
            if not factor < 1.0:
                raise ContractionError(
                    f"GARCH11: a E[eps^2] + b = {factor:.4f} is not below 1"
                )
        else:
            est, se = _mc_contraction_factor(
                self.innovation, lambda e: (self.a * e**2 + self.b) ** (self.q / 2.0)
            )
            _require_factor_below_one(est, se, f"GARCH11 at q={self.q}")

    def init_state(self, count):
        m2 = self.innovation.second_moment()
        s2 = self.omega / (1.0 - self.a * m2 - self.b) if self.a * m2 + self.b < 1.0 else self.omega
        state = np.zeros((count, 2))
        state[:, 1] = s2
        return state

    def step(self, state, eps):
        s2 = self.omega + self.a * state[:, 0] ** 2 + self.b * state[:, 1]
        return np.stack([np.sqrt(s2) * eps[:, 0], s2], axis=1)


@dataclass(frozen=True)
class QAR1:
    """X_i = a(U_i) + b(U_i) X_{i-1} with affine a(u) = a0 + a1 u, b(u) = b0 + b1 u.

    U_i is uniform on [0,1]; sup_u |b(u)| < 1 reduces to both endpoints.
    """

    a0: float
    a1: float
    b0: float
    b1: float
    innovation: InnovationSpec = InnovationSpec("uniform-0-1")

    variant_name = "qar1"
    state_dim = 1
    draws_per_step = 1

    def __post_init__(self):
        if self.innovation.kind != "uniform-0-1":
            raise ValueError("QAR1 is driven by uniform-0-1 innovations")
        worst = max(abs(self.b0), abs(self.b0 + self.b1))
        if not worst < 1.0:
            raise ContractionError(
                f"QAR1 requires sup_u |b0 + b1 u| < 1 on [0,1], got {worst:.4f}"
            )

    def init_state(self, count):
        return np.zeros((count, 1))

    def step(self, state, eps):
        u = eps[:, 0]
        return (self.a0 + self.a1 * u + (self.b0 + self.b1 * u) * state[:, 0])[:, None]


@dataclass(frozen=True)
class RCAR1:
    """X_i = (phi + tau eta_i) X_{i-1} + eps_i with (eta_i, eps_i) iid innovation pairs.

    Contraction requires E|phi + tau eta|^q < 1; closed form at q=2, Monte
    Carlo otherwise. Two draws per step: coefficient noise first, then the
    additive innovation.
    """

    phi: float
    tau: float
    q: float = 2.0
    innovation: InnovationSpec = InnovationSpec("standard-normal")

    variant_name = "rcar1"
    state_dim = 1
    draws_per_step = 2

    def __post_init__(self):
        if self.tau < 0.0:
            raise ValueError(f"RCAR1 requires tau >= 0, got {self.tau}")
        if not self.q > 0.0:
            raise ValueError("RCAR1 requires q > 0")
        if self.q == 2.0:
            m1 = self.innovation.mean()
            m2 = self.innovation.second_moment()
            factor = self.phi**2 + 2.0 * self.phi * self.tau * m1 + self.tau**2 * m2
            if not factor < 1.0:
                raise ContractionError(
                    f"RCAR1: E(phi + tau eta)^2 = {factor:.4f} is not below 1"
                )
        else:
            est, se = _mc_contraction_factor(
                self.innovation, lambda e: np.abs(self.phi + self.tau * e) ** self.q
            )
            _require_factor_below_one(est, se, f"RCAR1 at q={self.q}")

    def init_state(self, count):
        return np.zeros((count, 1))

    def step(self, state, eps):
        return ((self.phi + self.tau * eps[:, 0]) * state[:, 0] + eps[:, 1])[:, None]


MODEL_VARIANTS = {cls.variant_name: cls for cls in (AR1, ARCH1, GARCH11, QAR1, RCAR1)}


def _innovation_block(model, keys, steps):
    """Per-replication innovation draws, shape (len(keys), steps, draws_per_step)."""
    k = model.draws_per_step
    out = np.empty((len(keys), steps * k))
    for r, key in enumerate(keys):
        out[r] = draw(derive_stream(model.innovation, key), steps * k)
    return out.reshape(len(keys), steps, k)


def _drive(model, state, eps, record):
    """Advance `state` through every time slice of eps (R, T, k).

    Returns (series, final_state) with series None unless `record`.
    """
    T = eps.shape[1]
    out = np.empty((eps.shape[0], T)) if record else None
    for t in range(T):
        state = model.step(state, eps[:, t, :])
        if record:
            out[:, t] = state[:, 0]
    return out, state


def simulate_batch(model, master_seed, replication_ids, n, burn_in=DEFAULT_BURN_IN):
    """Independent stationary trajectories, one per replication id, shape (R, n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    keys = [StreamKey(master_seed, check_replication_id(r)) for r in replication_ids]
    eps = _innovation_block(model, keys, burn_in + n)
    _, state = _drive(model, model.init_state(len(keys)), eps[:, :burn_in], record=False)
    series, _ = _drive(model, state, eps[:, burn_in:], record=True)
    return series


def simulate_path(model, key: StreamKey, n, burn_in=DEFAULT_BURN_IN):
    """One approximately stationary trajectory as an (n, 1) matrix."""
    series = simulate_batch(model, key.master_seed, [key.stream_id], n, burn_in)
    return series[0][:, None]


@dataclass(frozen=True, eq=False)
class CoupledPaths:
    """A trajectory and its copy from an independently re-drawn pre-sample.

    Both share every innovation from period 1 on, so rows differ only through
    the burned-in starting states.
    """

    original: np.ndarray
    perturbed: np.ndarray
    n: int
    d: int
    replication_id: int
    master_seed: int
    state0_original: np.ndarray
    state0_perturbed: np.ndarray


def presample_states(model, master_seed, replication_ids, n, burn_in=DEFAULT_BURN_IN):
    """Burned-in state pairs plus the shared period-1..n innovation block.

    The original state comes from the head of the replication's main stream;
    the perturbed state from an equally long run of its tagged pre-sample
    stream. Exposed separately so the sharing plumbing is testable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    main_keys = [StreamKey(master_seed, check_replication_id(r)) for r in replication_ids]
    R = len(main_keys)
    eps = _innovation_block(model, main_keys, burn_in + n)
    _, state_orig = _drive(model, model.init_state(R), eps[:, :burn_in], record=False)
    if burn_in > 0:
        pert_eps = _innovation_block(model, [k.presample() for k in main_keys], burn_in)
        _, state_pert = _drive(model, model.init_state(R), pert_eps, record=False)
    else:
        state_pert = model.init_state(R)
    return state_orig, state_pert, eps[:, burn_in:]


def coupled_from_states(model, state_original, state_perturbed, shared_eps):
    """Drive both states through the same innovations; returns (orig, pert) series."""
    orig, _ = _drive(model, state_original, shared_eps, record=True)
    pert, _ = _drive(model, state_perturbed, shared_eps, record=True)
    return orig, pert


def simulate_coupled_batch(model, master_seed, replication_ids, n, burn_in=DEFAULT_BURN_IN):
    """Coupled pairs for many replications: (orig (R, n), pert (R, n), state0s)."""
    s_orig, s_pert, shared = presample_states(model, master_seed, replication_ids, n, burn_in)
    orig, pert = coupled_from_states(model, s_orig, s_pert, shared)
    return orig, pert, s_orig, s_pert


def simulate_coupled(model, master_seed, replication_id, n, burn_in=DEFAULT_BURN_IN):
    orig, pert, s_o, s_p = simulate_coupled_batch(model, master_seed, [replication_id], n, burn_in)
    return CoupledPaths(
        original=orig[0][:, None],
        perturbed=pert[0][:, None],
        n=n,
        d=1,
        replication_id=int(replication_id),
        master_seed=int(master_seed),
        state0_original=s_o[0],
        state0_perturbed=s_p[0],
    )


# ---------------------------------------------------------------------------
# Embeddings: lift scalar series to vector observations. An embedding chain
# is applied left to right; auxiliary randomness (censoring draws, covariate
# designs, replica innovations) comes from one tagged uniform stream per
# replication, consumed in chain order, so coupled sides share it exactly.


@dataclass(frozen=True)
class LagPair:
    """Rows (x_{i-h}, x_i); output length drops by h."""

    h: int

    kind = "lag-pair"

    def __post_init__(self):
        if self.h < 0:
            raise ValueError("lag h must be >= 0")

    @property
    def offset(self):
        return self.h

    def out_dim(self, d_in):
        if d_in != 1:
            raise ValueError("lag-pair applies to scalar series")
        return 2

    def shared_aux(self, rows_in, model, burn_in):
        return 0

    def perturbed_aux(self, rows_in, model, burn_in):
        return 0

    def apply(self, block, shared_u, pert_u, model, burn_in, perturbed):
        self.out_dim(block.shape[2])
        rows = block.shape[1]
        if self.h >= rows:
            raise ValueError(f"lag h={self.h} needs more than {rows} rows")
        x = block[:, :, 0]
        return np.stack([x[:, : rows - self.h], x[:, self.h :]], axis=2)


@dataclass(frozen=True)
class BivariateCopy:
    """Pairs the series with an independent replica of the same process.

    The replica is driven by inverse-CDF transforms of the auxiliary uniform
    stream; under coupling its pre-sample comes from the tagged auxiliary
    pre-sample stream, so both columns decouple from the past together.
    """

    kind = "bivariate-copy"

    offset = 0

    def out_dim(self, d_in):
        if d_in != 1:
            raise ValueError("bivariate-copy applies to scalar series")
        return 2

    def shared_aux(self, rows_in, model, burn_in):
        if model is None:
            raise ValueError("bivariate-copy requires the generating model")
        return (burn_in + rows_in) * model.draws_per_step

    def perturbed_aux(self, rows_in, model, burn_in):
        return burn_in * model.draws_per_step

    def apply(self, block, shared_u, pert_u, model, burn_in, perturbed):
        self.out_dim(block.shape[2])
        R, rows = block.shape[0], block.shape[1]
        k = model.draws_per_step
        eps = model.innovation.quantile(shared_u).reshape(R, burn_in + rows, k)
        if perturbed:
            pre = model.innovation.quantile(pert_u).reshape(R, burn_in, k)
            _, state = _drive(model, model.init_state(R), pre, record=False)
        else:
            _, state = _drive(model, model.init_state(R), eps[:, :burn_in], record=False)
        replica, _ = _drive(model, state, eps[:, burn_in:], record=True)
        return np.stack([block[:, :, 0], replica], axis=2)


@dataclass(frozen=True)
class CensoredTriple:
    """Rows (t, c, z): the series as lifetime, an independent Gaussian censor,
    and a covariate vector with intercept plus uniform coordinates."""

    censor_loc: float
    censor_scale: float
    z_dim: int
    z_half_width: float = 1.0

    kind = "censored-triple"

    offset = 0

    def __post_init__(self):
        if not self.censor_scale > 0.0:
            raise ValueError("censor_scale must be > 0")
        if self.z_dim < 1:
            raise ValueError("z_dim must be >= 1")
        if not self.z_half_width > 0.0:
            raise ValueError("z_half_width must be > 0")

    def out_dim(self, d_in):
        if d_in != 1:
            raise ValueError("censored-triple applies to scalar series")
        return 2 + self.z_dim

    def shared_aux(self, rows_in, model, burn_in):
        return rows_in * self.z_dim

    def perturbed_aux(self, rows_in, model, burn_in):
        return 0

    def apply(self, block, shared_u, pert_u, model, burn_in, perturbed):
        self.out_dim(block.shape[2])
        R, rows = block.shape[0], block.shape[1]
        u = shared_u.reshape(R, rows, self.z_dim)
        c = self.censor_loc + self.censor_scale * special.ndtri(
            np.clip(u[:, :, 0], 2.0**-53, 1.0 - 2.0**-53)
        )
        out = np.empty((R, rows, 2 + self.z_dim))
        out[:, :, 0] = block[:, :, 0]
        out[:, :, 1] = c
        out[:, :, 2] = 1.0
        out[:, :, 3:] = self.z_half_width * (2.0 * u[:, :, 1:] - 1.0)
        return out


@dataclass(frozen=True)
class RegressionAugment:
    """Turns a two-column series into rows (y1, z1..., y2, z2...).

    Each response is y_j = x_j + z_j . eta0_j with a fresh covariate design
    z_j = (1, uniforms on [-w, w]); the true coefficients are part of the
    embedding so residual-based families can try to recover them.
    """

    eta0_first: tuple
    eta0_second: tuple
    z_half_width: float = 1.0

    kind = "regression-augment"

    offset = 0

    def __post_init__(self):
        if len(self.eta0_first) != len(self.eta0_second) or len(self.eta0_first) < 1:
            raise ValueError("coefficient vectors must share a length >= 1")
        if not self.z_half_width > 0.0:
            raise ValueError("z_half_width must be > 0")

    @property
    def z_dim(self):
        return len(self.eta0_first)

    def out_dim(self, d_in):
        if d_in != 2:
            raise ValueError("regression-augment applies to two-column series")
        return 2 * (1 + self.z_dim)

    def shared_aux(self, rows_in, model, burn_in):
        return rows_in * 2 * (self.z_dim - 1)

    def perturbed_aux(self, rows_in, model, burn_in):
        return 0

    def apply(self, block, shared_u, pert_u, model, burn_in, perturbed):
        self.out_dim(block.shape[2])
        R, rows = block.shape[0], block.shape[1]
        z = np.ones((R, rows, 2, self.z_dim))
        if self.z_dim > 1:
            u = shared_u.reshape(R, rows, 2, self.z_dim - 1)
            z[:, :, :, 1:] = self.z_half_width * (2.0 * u - 1.0)
        eta = np.stack([np.asarray(self.eta0_first), np.asarray(self.eta0_second)])
        y = block + np.einsum("rnjd,jd->rnj", z, eta)
        out = np.empty((R, rows, 2 * (1 + self.z_dim)))
        out[:, :, 0] = y[:, :, 0]
        out[:, :, 1 : 1 + self.z_dim] = z[:, :, 0, :]
        out[:, :, 1 + self.z_dim] = y[:, :, 1]
        out[:, :, 2 + self.z_dim :] = z[:, :, 1, :]
        return out


def embedding_offset(embeddings):
    return sum(e.offset for e in embeddings)


def embedded_dim(embeddings, d_in=1):
    d = d_in
    for e in embeddings:
        d = e.out_dim(d)
    return d


def _apply_chain(blocks, embeddings, model, burn_in, master_seed, replication_ids):
    """Apply an embedding chain to every side in `blocks`, sharing aux draws."""
    shared = pert = None

    def shared_streams():
        nonlocal shared
        if shared is None:
            ids = [check_replication_id(r) for r in replication_ids]
            shared = [uniform_stream(StreamKey(master_seed, r | AUX_TAG)) for r in ids]
        return shared

    def pert_streams():
        nonlocal pert
        if pert is None:
            ids = [check_replication_id(r) for r in replication_ids]
            pert = [
                uniform_stream(StreamKey(master_seed, r | AUX_TAG | PRESAMPLE_TAG)) for r in ids
            ]
        return pert

    for emb in embeddings:
        rows_in = next(iter(blocks.values())).shape[1]
        cs = emb.shared_aux(rows_in, model, burn_in)
        shared_u = np.stack([draw(s, cs) for s in shared_streams()]) if cs else None
        cp = emb.perturbed_aux(rows_in, model, burn_in) if "perturbed" in blocks else 0
        pert_u = np.stack([draw(s, cp) for s in pert_streams()]) if cp else None
        blocks = {
            side: emb.apply(
                b,
                shared_u,
                pert_u if side == "perturbed" else None,
                model,
                burn_in,
                perturbed=side == "perturbed",
            )
            for side, b in blocks.items()
        }
    return blocks


def simulate_embedded_batch(model, embeddings, master_seed, replication_ids, rows, burn_in=DEFAULT_BURN_IN):
    """Embedded stationary observations, shape (R, rows, d)."""
    n = rows + embedding_offset(embeddings)
    series = simulate_batch(model, master_seed, replication_ids, n, burn_in)
    blocks = _apply_chain(
        {"plain": series[:, :, None]}, embeddings, model, burn_in, master_seed, replication_ids
    )
    return blocks["plain"]


def simulate_coupled_embedded_batch(
    model, embeddings, master_seed, replication_ids, rows, burn_in=DEFAULT_BURN_IN
):
    """Coupled embedded observations: (orig (R, rows, d), pert (R, rows, d)).

    Embedding randomness is drawn once per replication and shared across the
    two sides; only replica pre-samples differ, mirroring the path coupling.
    """
    n = rows + embedding_offset(embeddings)
    orig, pert, _, _ = simulate_coupled_batch(model, master_seed, replication_ids, n, burn_in)
    blocks = _apply_chain(
        {"original": orig[:, :, None], "perturbed": pert[:, :, None]},
        embeddings,
        model,
        burn_in,
        master_seed,
        replication_ids,
    )
    return blocks["original"], blocks["perturbed"]


def embed(source, embeddings, model=None, burn_in=DEFAULT_BURN_IN, key=None):
    """Lift a path matrix or a CoupledPaths through an embedding chain.

    Plain paths need their originating stream key when the chain draws
    auxiliary randomness; coupled paths carry their identity already.
    """
    embeddings = tuple(embeddings)
    if isinstance(source, CoupledPaths):
        blocks = _apply_chain(
            {"original": source.original[None], "perturbed": source.perturbed[None]},
            embeddings,
            model,
            burn_in,
            source.master_seed,
            [source.replication_id],
        )
        o, p = blocks["original"][0], blocks["perturbed"][0]
        return CoupledPaths(
            original=o,
            perturbed=p,
            n=o.shape[0],
            d=o.shape[1],
            replication_id=source.replication_id,
            master_seed=source.master_seed,
            state0_original=source.state0_original,
            state0_perturbed=source.state0_perturbed,
        )
    path = np.asarray(source, dtype=float)
    if path.ndim == 1:
        path = path[:, None]
    needs_aux = any(e.shared_aux(path.shape[0], model, burn_in) for e in embeddings)
    if needs_aux and key is None:
        raise ValueError("this embedding chain draws auxiliary randomness; pass the path's stream key")
    blocks = _apply_chain(
        {"plain": path[None]},
        embeddings,
        model,
        burn_in,
        key.master_seed if key is not None else 0,
        [key.stream_id if key is not None else 0],
    )
    return blocks["plain"][0]


# ---------------------------------------------------------------------------
# Stationary laws and long-run means.


@dataclass(frozen=True)
class Uniform01Law:
    """iid uniform rows on [0, 1), optionally several independent columns."""

    dim: int = 1

    kind = "uniform01"

    def sample(self, key, count):
        u = draw(uniform_stream(key), count * self.dim)
        return u.reshape(count, self.dim)

    def marginal_cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def marginal_lipschitz(self):
        return 1.0


@dataclass(frozen=True)
class GaussianLaw:
    """iid Gaussian rows, optionally several independent columns."""

    mean: float = 0.0
    sd: float = 1.0
    dim: int = 1

    kind = "gaussian"

    def __post_init__(self):
        if not self.sd > 0.0:
            raise ValueError("sd must be > 0")

    def sample(self, key, count):
        z = draw(derive_stream(InnovationSpec("standard-normal"), key), count * self.dim)
        return (self.mean + self.sd * z).reshape(count, self.dim)

    def marginal_cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def marginal_lipschitz(self):
        # density peak of the marginal
        return 1.0 / (self.sd * math.sqrt(2.0 * math.pi))


@dataclass(frozen=True)
class StationaryLaw:
    """Law of an embedded model observation, sampled as one long burned-in path.

    Rows are serially dependent, so consumers must use dependence-aware
    standard errors (batch means).
    """

    model: object
    embeddings: tuple = ()
    burn_in: int = DEFAULT_BURN_IN

    kind = "stationary"

    def sample(self, key, count):
        block = simulate_embedded_batch(
            self.model, self.embeddings, key.master_seed, [key.stream_id], count, self.burn_in
        )
        return block[0]


def stationary_marginal(model):
    """Closed-form one-dimensional stationary law, or None.

    Only the Gaussian AR1 case is exact; everything else falls back to
    sampling.
    """
    if isinstance(model, AR1) and model.innovation.kind == "standard-normal":
        return GaussianLaw(0.0, model.sigma / math.sqrt(1.0 - model.phi**2))
    return None


def bvn_cdf(a, b, rho):
    """P(Z1 <= a, Z2 <= b) under a standard bivariate normal with correlation rho.

    Deterministic quadrature over the correlation path, so oracle values do
    not depend on any random stream.
    """
    if not -1.0 < rho < 1.0:
        raise ValueError("rho must lie strictly inside (-1, 1)")

    def integrand(t):
        return math.exp(-(a * a - 2.0 * t * a * b + b * b) / (2.0 * (1.0 - t * t))) / math.sqrt(
            1.0 - t * t
        )

    tail, _ = integrate.quad(integrand, 0.0, rho, epsabs=1e-12, limit=200)
    return float(special.ndtr(a) * special.ndtr(b) + tail / (2.0 * math.pi))


_oracle_cache = {}
_oracle_lock = threading.Lock()


def _gaussian_huber_mean(theta, delta, sd):
    # E clip(X - theta, -delta, delta) for X ~ N(0, sd^2)
    m = -theta
    alpha = (-delta - m) / sd
    beta = (delta - m) / sd
    phi = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    return (
        -delta * special.ndtr(alpha)
        + delta * (1.0 - special.ndtr(beta))
        + m * (special.ndtr(beta) - special.ndtr(alpha))
        - sd * (phi(beta) - phi(alpha))
    )


def stationary_mean_oracle(model, family, theta, oracle_length=100_000, embeddings=()):
    """Long-run mean E f_theta(xi_0) of a family member over the embedded model.

    Exact for Gaussian AR1 with the indicator, sign, Huber, and lag-pair
    quantilogram families; otherwise a cached long-path time average drawn
    from a fixed dedicated stream.
    """
    if oracle_length < 100_000:
        raise ValueError("oracle_length must be >= 100000")
    embeddings = tuple(embeddings)
    theta_key = tuple(float(t) for t in np.atleast_1d(theta))
    cache_key = (model, embeddings, family, theta_key, int(oracle_length))
    with _oracle_lock:
        if cache_key in _oracle_cache:
            return _oracle_cache[cache_key]

    value = _closed_form_mean(model, family, theta, embeddings)
    if value is None:
        block = simulate_embedded_batch(
            model, embeddings, ORACLE_SEED, [0], oracle_length, DEFAULT_BURN_IN
        )
        vals = family.evaluate_path(theta, block[0])
        value = np.asarray(vals, dtype=float).mean(axis=0)
        value = float(value) if value.ndim == 0 else value
    with _oracle_lock:
        _oracle_cache[cache_key] = value
    return value


def _closed_form_mean(model, family, theta, embeddings):
    law = stationary_marginal(model)
    if law is None:
        return None
    sd = law.sd
    name = getattr(family, "variant_name", None)
    if name == "indicator" and embeddings == ():
        return float(special.ndtr(float(theta) / sd))
    if name == "sign" and embeddings == ():
        return float(1.0 - 2.0 * special.ndtr(float(theta) / sd))
    if name == "huber" and embeddings == ():
        return float(_gaussian_huber_mean(float(theta), family.delta, sd))
    if (
        name == "quantilogram"
        and len(embeddings) == 1
        and getattr(embeddings[0], "kind", None) == "lag-pair"
    ):
        z = float(theta) / sd
        rho_h = model.phi ** embeddings[0].h if embeddings[0].h > 0 else 1.0
        alpha = family.alpha
        if embeddings[0].h == 0:
            # both coordinates coincide
            joint = special.ndtr(z)
        else:
            joint = bvn_cdf(z, z, rho_h)
        return float(alpha**2 - 2.0 * alpha * special.ndtr(z) + joint)
    return None


def burn_in_doubling_gap(model, master_seed, replication_ids, n, burn_in=DEFAULT_BURN_IN):
    """Second-moment estimates at burn_in and 2*burn_in with a combined SE.

    Operational stand-in for stationarity: statistics should be stable when
    the burn-in doubles.
    """
    out = []
    for b in (burn_in, 2 * burn_in):
        series = simulate_batch(model, master_seed, replication_ids, n, b)
        per_rep = (series**2).mean(axis=1)
        out.append((float(per_rep.mean()), float(per_rep.std(ddof=1) / math.sqrt(len(per_rep)))))
    (m_a, se_a), (m_b, se_b) = out
    return {"estimate": m_a, "doubled": m_b, "combined_se": math.hypot(se_a, se_b)}
