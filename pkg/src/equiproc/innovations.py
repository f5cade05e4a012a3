"""Deterministic, splittable streams of iid innovations.

Every Monte Carlo experiment in this package draws its randomness here. A
stream is identified by a :class:`StreamKey` (master seed, stream id); the two
64-bit words are used directly as the 128-bit key of a counter-based Philox
generator, so distinct keys yield statistically independent, non-overlapping
sequences and replications parallelize without shared state.

The generator algorithm is fixed: Philox 4x64-10 as exposed by
``numpy.random.Philox``, with distribution transforms from
``numpy.random.Generator``. Changing either is a breaking change because
recorded report files depend on the exact draw sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

KINDS = ("standard-normal", "uniform-0-1", "student-t", "rademacher")

# Reserved high bits of stream_id. Bit 63 tags the independent pre-sample
# streams that feed perturbed coupled paths; bit 62 tags auxiliary streams
# used by stochastic embeddings. Replication indices must stay below
# REPLICATION_LIMIT so tagging can never collide with another replication.
PRESAMPLE_TAG = 1 << 63
AUX_TAG = 1 << 62
REPLICATION_LIMIT = 1 << 62

_U64 = 1 << 64


@dataclass(frozen=True)
class InnovationSpec:
    """Distribution of one innovation: the single source of randomness of a model.

    kind is one of ``standard-normal``, ``uniform-0-1``, ``student-t`` (with
    ``dof > 2`` so second moments exist) or ``rademacher``.
    """

    kind: str
    dof: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown innovation kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "student-t":
            if self.dof is None or not self.dof > 2:
                raise ValueError("student-t innovations require dof > 2")
        elif self.dof is not None:
            raise ValueError(f"dof is only meaningful for student-t, not {self.kind!r}")

    def mean(self) -> float:
        return 0.5 if self.kind == "uniform-0-1" else 0.0

    def second_moment(self) -> float:
        if self.kind == "uniform-0-1":
            return 1.0 / 3.0
        if self.kind == "student-t":
            return self.dof / (self.dof - 2.0)
        return 1.0

    def abs_moment(self, q: float) -> float:
        """E|eps|^q in closed form; +inf where the moment does not exist."""
        if q <= 0:
            raise ValueError("q must be positive")
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "uniform-0-1":
            return 1.0 / (q + 1.0)
        if self.kind == "standard-normal":
            return 2.0 ** (q / 2.0) * math.gamma((q + 1.0) / 2.0) / math.sqrt(math.pi)
        # student-t: finite only below the dof
        if q >= self.dof:
            return math.inf
        nu = self.dof
        return (
            nu ** (q / 2.0)
            * math.gamma((q + 1.0) / 2.0)
            * math.gamma((nu - q) / 2.0)
            / (math.sqrt(math.pi) * math.gamma(nu / 2.0))
        )

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Inverse CDF, mapping uniform draws to draws from this distribution.

        Used where an innovation sequence must be derived from a shared
        uniform stream. Endpoints are clipped away: the uniform grid is
        half-open so u=1 never occurs, and u=0 has probability 2^-53.
        """
        if self.kind == "uniform-0-1":
            return np.asarray(u, dtype=float)
        if self.kind == "rademacher":
            return np.where(np.asarray(u) < 0.5, -1.0, 1.0)
        u = np.clip(u, 2.0**-53, 1.0 - 2.0**-53)
        if self.kind == "standard-normal":
            return special.ndtri(u)
        return stats.t.ppf(u, self.dof)


@dataclass(frozen=True)
class StreamKey:
    """Identity of one innovation stream: (master_seed, stream_id), both u64."""

    master_seed: int
    stream_id: int

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < _U64:
                raise ValueError(f"{name} must be an integer in [0, 2^64)")

    def presample(self) -> "StreamKey":
        """Key of the independent pre-sample stream paired with this one."""
        return StreamKey(self.master_seed, self.stream_id | PRESAMPLE_TAG)

    def aux(self) -> "StreamKey":
        """Key of the auxiliary stream used by stochastic embeddings."""
        return StreamKey(self.master_seed, self.stream_id | AUX_TAG)


class InnovationStream:
    """A positioned stream of iid draws. Value-like: do not share one across threads."""

    def __init__(self, spec: InnovationSpec, key: StreamKey):
        self.spec = spec
        self.key = key
        self._gen = np.random.Generator(
            np.random.Philox(key=np.array([key.master_seed, key.stream_id], dtype=np.uint64))
        )

    def draw(self, count: int) -> np.ndarray:
        if count < 1:
            raise ValueError("count must be >= 1")
        kind = self.spec.kind
        if kind == "standard-normal":
            return self._gen.standard_normal(count)
        if kind == "uniform-0-1":
            return self._gen.random(count)
        if kind == "student-t":
            return self._gen.standard_t(self.spec.dof, count)
        return 2.0 * self._gen.integers(0, 2, size=count) - 1.0


def derive_stream(spec: InnovationSpec, key: StreamKey) -> InnovationStream:
    """Deterministically derive the stream addressed by `key`."""
    return InnovationStream(spec, key)


def draw(stream: InnovationStream, count: int) -> np.ndarray:
    """Next `count` values of `stream`; advances its position."""
    return stream.draw(count)


def uniform_stream(key: StreamKey) -> InnovationStream:
    return InnovationStream(InnovationSpec("uniform-0-1"), key)


def check_replication_id(rep: int) -> int:
    if not 0 <= rep < REPLICATION_LIMIT:
        raise ValueError(f"replication id must be in [0, 2^62), got {rep}")
    return int(rep)
