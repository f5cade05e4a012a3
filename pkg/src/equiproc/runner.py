"""Experiment orchestration: JSON configs, dispatch, report files, summaries.

A config names one experiment kind plus its inputs. Parsing rejects unknown
keys, validation reports every violation in one error, and a run writes its
reports plus a manifest with content digests. Reports are byte-deterministic
in (config, seed) regardless of thread count.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import __version__, empproc, gmc, plotting, serialize
from .errors import ConfigError
from .estimators import (
    ModelQuantilogramOracle,
    dominance_stat,
    m_estimate,
    sample_quantilogram,
)
from .families import FAMILY_VARIANTS, bracket_count_fn, bracketing_integral, build_cover
from .gmc import IndicatorCouplingSpec
from .models import (
    DEFAULT_BURN_IN,
    MODEL_VARIANTS,
    BivariateCopy,
    CensoredTriple,
    InnovationSpec,
    LagPair,
    RegressionAugment,
    simulate_batch,
    simulate_embedded_batch,
)

KINDS = (
    "simulate",
    "gmc-decay",
    "family-decay",
    "bracket-decay",
    "indicator-decay",
    "modulus",
    "probe",
    "moment-scaling",
    "quantilogram",
    "m-estimate",
    "dominance",
    "bracketing-integral",
)

EMBEDDING_VARIANTS = {
    "lag-pair": LagPair,
    "bivariate-copy": BivariateCopy,
    "censored-triple": CensoredTriple,
    "regression-augment": RegressionAugment,
}

# keys each kind accepts beyond the common ones
_COMMON_KEYS = {"kind", "master_seed", "burn_in", "out_dir"}
_KIND_KEYS = {
    "simulate": {"model", "embeddings", "n", "reps"},
    "gmc-decay": {"model", "embeddings", "lags", "order", "reps"},
    "family-decay": {"model", "embeddings", "family", "theta_grid", "lags", "order", "reps"},
    "bracket-decay": {"model", "embeddings", "family", "delta", "lags", "order", "reps"},
    "indicator-decay": {"model", "embeddings", "spec", "lam_grid", "lags", "order", "reps"},
    "modulus": {"model", "embeddings", "family", "theta_grid", "deltas", "n", "Q", "gamma", "eta", "reps"},
    "probe": {"model", "embeddings", "family", "theta_grid", "deltas", "eta", "ns", "reps"},
    "moment-scaling": {"model", "embeddings", "family", "pairs", "n", "Q", "gamma", "reps"},
    "quantilogram": {"model", "alpha", "h", "n", "reps"},
    "m-estimate": {"model", "variant", "clip", "n", "reps"},
    "dominance": {"model", "theta_grid", "n", "reps"},
    "bracketing-integral": {"model", "family", "gamma", "Q", "lipschitz", "design_bound"},
}
_REQUIRED_KEYS = {
    "simulate": {"model", "n", "reps"},
    "gmc-decay": {"model", "lags", "order", "reps"},
    "family-decay": {"model", "embeddings", "family", "theta_grid", "lags", "order", "reps"},
    "bracket-decay": {"model", "embeddings", "family", "delta", "lags", "order", "reps"},
    "indicator-decay": {"model", "spec", "lags", "order", "reps"},
    "modulus": {"model", "embeddings", "family", "theta_grid", "deltas", "n", "Q", "gamma", "reps"},
    "probe": {"model", "embeddings", "family", "theta_grid", "deltas", "eta", "ns", "reps"},
    "moment-scaling": {"model", "embeddings", "family", "pairs", "n", "Q", "gamma", "reps"},
    "quantilogram": {"model", "alpha", "h", "n"},
    "m-estimate": {"model", "variant", "n"},
    "dominance": {"model", "theta_grid", "n"},
    "bracketing-integral": {"family", "gamma", "Q"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    master_seed: int
    model: dict | None = None
    embeddings: tuple = ()
    family: dict | None = None
    spec: dict | None = None
    theta_grid: dict | None = None
    lam_grid: dict | None = None
    deltas: tuple | None = None
    lags: tuple | None = None
    ns: tuple | None = None
    pairs: tuple | None = None
    n: int | None = None
    reps: int | None = None
    order: float | None = None
    Q: int | None = None
    gamma: float | None = None
    eta: float | None = None
    delta: float | None = None
    alpha: float | None = None
    h: int | None = None
    variant: str | None = None
    clip: float | None = None
    lipschitz: float | None = None
    design_bound: float | None = None
    burn_in: int = DEFAULT_BURN_IN
    out_dir: str | None = None


def _freeze(value):
    if isinstance(value, dict):
        return {k: _freeze(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _thaw(value):
    if isinstance(value, dict):
        return {k: _thaw(v) for k, v in value.items()}
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value


def parse_config(text):
    """Parse a JSON config document; structural problems are aggregated."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])

    problems = []
    kind = raw.get("kind")
    if kind not in KINDS:
        problems.append(f"kind must be one of {', '.join(KINDS)}; got {kind!r}")
        raise ConfigError(problems)
    allowed = _COMMON_KEYS | _KIND_KEYS[kind]
    for key in sorted(set(raw) - allowed):
        problems.append(f"unknown key {key!r} for kind {kind!r}")
    for key in sorted(_REQUIRED_KEYS[kind] - set(raw)):
        problems.append(f"missing required key {key!r} for kind {kind!r}")
    if "master_seed" not in raw:
        problems.append("missing required key 'master_seed'")
    if problems:
        raise ConfigError(problems)

    values = {}
    for field in dataclass_fields(ExperimentConfig):
        if field.name in raw:
            values[field.name] = _freeze(raw[field.name])
    if isinstance(values.get("model"), dict):
        inn = values["model"].get("innovation")
        if isinstance(inn, str):
            values["model"] = {**values["model"], "innovation": {"kind": inn}}
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError([str(exc)]) from exc


def serialize_config(config):
    """Canonical JSON for a config; parse(serialize(c)) == c."""
    keep = {"kind", "master_seed"} | _REQUIRED_KEYS.get(config.kind, set())
    out = {}
    for field in dataclass_fields(ExperimentConfig):
        value = getattr(config, field.name)
        if value == field.default and field.name not in keep:
            continue
        out[field.name] = _thaw(value)
    return serialize.json_text(out)


def parse_config_file(path):
    return parse_config(Path(path).read_text())


def _build_model(spec, problems):
    if not isinstance(spec, dict) or "name" not in spec:
        problems.append("model must be an object with a 'name'")
        return None
    name = spec["name"]
    cls = MODEL_VARIANTS.get(name)
    if cls is None:
        problems.append(f"unknown model {name!r}; expected one of {sorted(MODEL_VARIANTS)}")
        return None
    kwargs = {k: v for k, v in spec.items() if k != "name"}
    if isinstance(kwargs.get("innovation"), dict):
        try:
            kwargs["innovation"] = InnovationSpec(**kwargs["innovation"])
        except (TypeError, ValueError) as exc:
            problems.append(f"model innovation: {exc}")
            return None
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"model {name!r}: {exc}")
        return None


def _build_embeddings(specs, problems):
    out = []
    for i, spec in enumerate(specs):
        if not isinstance(spec, dict) or "name" not in spec:
            problems.append(f"embedding {i} must be an object with a 'name'")
            continue
        cls = EMBEDDING_VARIANTS.get(spec["name"])
        if cls is None:
            problems.append(
                f"unknown embedding {spec['name']!r}; expected one of {sorted(EMBEDDING_VARIANTS)}"
            )
            continue
        try:
            out.append(cls(**{k: v for k, v in spec.items() if k != "name"}))
        except (TypeError, ValueError) as exc:
            problems.append(f"embedding {spec['name']!r}: {exc}")
    return tuple(out)


def _build_family(spec, problems):
    if not isinstance(spec, dict) or "name" not in spec:
        problems.append("family must be an object with a 'name'")
        return None
    cls = FAMILY_VARIANTS.get(spec["name"])
    if cls is None:
        problems.append(f"unknown family {spec['name']!r}; expected one of {sorted(FAMILY_VARIANTS)}")
        return None
    try:
        return cls(**{k: v for k, v in spec.items() if k != "name"})
    except (TypeError, ValueError) as exc:
        problems.append(f"family {spec['name']!r}: {exc}")
        return None


def _build_spec(spec, problems):
    if not isinstance(spec, dict):
        problems.append("spec must be an object")
        return None
    if spec.get("case") == "functional":
        problems.append(
            "the functional case needs a programmatic map; use the library interface"
        )
        return None
    try:
        return IndicatorCouplingSpec(**spec)
    except (TypeError, ValueError) as exc:
        problems.append(f"coupling spec: {exc}")
        return None


def _grid_points(grid, problems, label):
    if not isinstance(grid, dict):
        problems.append(f"{label} must be an object")
        return None
    if "points" in grid:
        extra = set(grid) - {"points"}
        if extra:
            problems.append(f"{label}: unexpected keys {sorted(extra)}")
        pts = np.asarray(grid["points"], dtype=float)
        if pts.size == 0:
            problems.append(f"{label} must contain at least one point")
            return None
        return pts
    if set(grid) == {"start", "stop", "count"}:
        if int(grid["count"]) < 1:
            problems.append(f"{label} count must be >= 1")
            return None
        return np.linspace(grid["start"], grid["stop"], int(grid["count"]))
    problems.append(f"{label} needs either 'points' or start/stop/count")
    return None


def _positive_ints(values, problems, label, minimum=1):
    try:
        out = tuple(int(v) for v in values)
    except (TypeError, ValueError):
        problems.append(f"{label} must be a list of integers")
        return None
    if any(v < minimum for v in out):
        problems.append(f"{label} entries must be >= {minimum}")
        return None
    return out


def validate_config(config):
    """Every violated precondition as one message; empty list means runnable."""
    problems = []
    kind = config.kind
    if kind not in KINDS:
        return [f"unknown kind {kind!r}"]

    if not isinstance(config.master_seed, int) or not 0 <= config.master_seed < 2**64:
        problems.append("master_seed must be an integer in [0, 2^64)")
    if not isinstance(config.burn_in, int) or config.burn_in < 0:
        problems.append("burn_in must be a nonnegative integer")

    keys = _KIND_KEYS[kind]
    if "model" in keys and config.model is not None:
        _build_model(config.model, problems)
    if config.embeddings:
        _build_embeddings(config.embeddings, problems)
    if "family" in keys and config.family is not None:
        _build_family(config.family, problems)
    if kind == "indicator-decay" and config.spec is not None:
        _build_spec(config.spec, problems)

    if "reps" in keys and config.reps is not None:
        floor = gmc.MIN_DECAY_REPS if kind.endswith("-decay") else 1
        if config.reps < floor:
            problems.append(f"reps must be >= {floor} for {kind}")
    if "n" in keys and config.n is not None and config.n < 1:
        problems.append("n must be >= 1")
    if "lags" in keys and config.lags is not None:
        lags = _positive_ints(config.lags, problems, "lags")
        if lags is not None and any(b <= a for a, b in zip(lags, lags[1:])):
            problems.append("lags must be strictly increasing")
    if "ns" in keys and config.ns is not None:
        _positive_ints(config.ns, problems, "ns")
    if "order" in keys and config.order is not None and not config.order > 0:
        problems.append("order must be > 0")
    if "Q" in keys and config.Q is not None:
        if int(config.Q) != config.Q or config.Q < 2 or config.Q % 2 != 0:
            problems.append("Q must be an even integer >= 2")
    if "gamma" in keys and config.gamma is not None and not config.gamma > 0:
        problems.append("gamma must be > 0")
    if "eta" in keys and config.eta is not None and not config.eta > 0:
        problems.append("eta must be > 0")
    if "delta" in keys and config.delta is not None and not config.delta > 0:
        problems.append("delta must be > 0")
    if "deltas" in keys and config.deltas is not None:
        if len(config.deltas) == 0 or any(not d > 0 for d in config.deltas):
            problems.append("deltas must be a nonempty list of positive numbers")
    if "theta_grid" in keys and config.theta_grid is not None:
        _grid_points(config.theta_grid, problems, "theta_grid")
    if "lam_grid" in keys and config.lam_grid is not None:
        _grid_points(config.lam_grid, problems, "lam_grid")
    if "pairs" in keys and config.pairs is not None:
        if len(config.pairs) == 0:
            problems.append("pairs must be nonempty")
        for i, pair in enumerate(config.pairs):
            if len(pair) != 2:
                problems.append(f"pairs[{i}] must hold exactly two parameters")
    if "alpha" in keys and config.alpha is not None and not 0 < config.alpha < 1:
        problems.append("alpha must lie in (0, 1)")
    if "h" in keys and config.h is not None:
        if config.h < 1:
            problems.append("h must be >= 1")
        elif config.n is not None and config.h >= config.n:
            problems.append("h must be smaller than n")
    if kind == "m-estimate":
        if config.variant not in (None, "median", "huber"):
            problems.append("variant must be 'median' or 'huber'")
        if config.variant == "huber" and (config.clip is None or not config.clip > 0):
            problems.append("huber variant requires clip > 0")
        if config.variant == "median" and config.clip is not None:
            problems.append("median variant takes no clip")
    if kind == "bracketing-integral":
        if config.model is None and config.lipschitz is None:
            problems.append("bracketing-integral needs a model or an explicit lipschitz")
        if config.lipschitz is not None and not config.lipschitz > 0:
            problems.append("lipschitz must be > 0")
    return problems


@dataclass(frozen=True)
class RunManifest:
    kind: str
    config_sha256: str
    version: str
    wall_clock_seconds: float
    master_seed: int
    outputs: tuple


def _marginal_info(config, model):
    from .families import MarginalInfo

    if config.lipschitz is not None:
        return MarginalInfo(lipschitz=config.lipschitz, design_bound=config.design_bound)
    info = empproc.stationary_marginal_info(model, config.embeddings)
    if config.design_bound is not None:
        info = MarginalInfo(
            lipschitz=info.lipschitz, sample=info.sample, design_bound=config.design_bound
        )
    return info


def _dispatch(config, out, threads):
    """Run one experiment; returns list of written file paths."""
    problems = []
    model = _build_model(config.model, problems) if config.model is not None else None
    embeddings = _build_embeddings(config.embeddings, problems)
    family = _build_family(config.family, problems) if config.family is not None else None
    if problems:
        raise ConfigError(problems)
    seed = config.master_seed
    kind = config.kind
    common = {"burn_in": config.burn_in, "threads": threads}

    if kind == "simulate":
        block = simulate_embedded_batch(
            model, embeddings, seed, list(range(config.reps)), config.n, config.burn_in
        )
        return [serialize.write_series(block, out / "series.csv")]

    if kind == "gmc-decay":
        report = gmc.coupling_norm(
            model, config.lags, config.order, config.reps, seed,
            embeddings=embeddings, **common,
        )
    elif kind == "family-decay":
        grid = _grid_points(config.theta_grid, [], "theta_grid")
        report = gmc.family_coupling_norm(
            model, embeddings, family, grid, config.lags, config.order,
            config.reps, seed, **common,
        )
    elif kind == "bracket-decay":
        cover = build_cover(family, config.delta, _marginal_info(config, model))
        report = gmc.bracket_coupling_norm(
            model, embeddings, cover, config.lags, config.order,
            config.reps, seed, **common,
        )
    elif kind == "indicator-decay":
        spec = _build_spec(config.spec, [])
        lam = None if config.lam_grid is None else _grid_points(config.lam_grid, [], "lam_grid")
        report = gmc.indicator_coupling(
            model, spec, config.lags, config.order, config.reps, seed,
            lam_grid=lam, embeddings=embeddings, **common,
        )
    else:
        report = None

    if report is not None:
        paths = serialize.write_decay_report(report, out / "decay.csv", out / "decay.json", seed)
        fig = plotting.decay_figure(report, out / "decay.png")
        return [*paths, fig]

    if kind == "modulus":
        grid = _grid_points(config.theta_grid, [], "theta_grid")
        report = empproc.modulus_experiment(
            family, model, embeddings, config.deltas, config.n, config.Q,
            config.gamma, config.reps, grid, seed,
            eta=0.5 if config.eta is None else config.eta, **common,
        )
        return [
            serialize.write_modulus_report(report, out / "modulus.csv"),
            plotting.modulus_figure(report, out / "modulus.png"),
        ]

    if kind == "probe":
        grid = _grid_points(config.theta_grid, [], "theta_grid")
        report = empproc.equicontinuity_probe(
            family, model, embeddings, config.deltas, config.eta, config.ns,
            config.reps, grid, seed, **common,
        )
        return [
            serialize.write_probe_report(report, out / "probe.csv"),
            plotting.probe_figure(report, out / "probe.png"),
        ]

    if kind == "moment-scaling":
        report = empproc.moment_scaling(
            family, model, embeddings, config.pairs, config.n, config.Q,
            config.gamma, config.reps, seed, **common,
        )
        return [serialize.write_moment_scaling_report(report, out / "moment_scaling.csv")]

    if kind == "quantilogram":
        reps = config.reps or 1
        series = simulate_batch(model, seed, list(range(reps)), config.n, config.burn_in)
        oracle = ModelQuantilogramOracle(model, alpha=config.alpha, h=config.h)
        results = [sample_quantilogram(series[r], config.alpha, config.h, oracle) for r in range(reps)]
        rows = [
            (r, x.theta_hat, x.statistic, x.scaled_statistic, x.drift, x.nu_at_quantile, x.remainder)
            for r, x in enumerate(results)
        ]
        csv = serialize.write_csv(
            out / "quantilogram.csv",
            ["replication", "theta_hat", "statistic", "scaled_statistic", "drift",
             "nu_at_quantile", "remainder"],
            rows,
        )
        js = serialize.write_quantilogram_result(results[0], out / "quantilogram.json")
        return [csv, js]

    if kind == "m-estimate":
        reps = config.reps or 1
        series = simulate_batch(model, seed, list(range(reps)), config.n, config.burn_in)
        results = [m_estimate(config.variant, series[r], delta=config.clip) for r in range(reps)]
        csv = serialize.write_csv(
            out / "m_estimate.csv",
            ["replication", "theta_hat", "residual_score", "achieved"],
            [(r, x.theta_hat, x.residual_score, x.achieved) for r, x in enumerate(results)],
        )
        js = serialize.write_m_estimate_result(results[0], out / "m_estimate.json")
        return [csv, js]

    if kind == "dominance":
        reps = config.reps or 1
        grid = _grid_points(config.theta_grid, [], "theta_grid")
        series = simulate_batch(model, seed, list(range(2 * reps)), config.n, config.burn_in)
        results = [
            dominance_stat(series[2 * r], series[2 * r + 1], grid) for r in range(reps)
        ]
        csv = serialize.write_csv(
            out / "dominance.csv",
            ["replication", "statistic", "argmax_theta"],
            [(r, x.statistic, x.argmax_theta) for r, x in enumerate(results)],
        )
        paths = serialize.write_dominance_result(
            results[0], out / "dominance_values.csv", out / "dominance.json"
        )
        return [csv, *paths]

    if kind == "bracketing-integral":
        marginal = _marginal_info(config, model)
        result = bracketing_integral(bracket_count_fn(family, marginal), config.gamma, config.Q)
        return [serialize.write_integral_result(result, config.gamma, config.Q, out / "integral.json")]

    raise ConfigError([f"unknown kind {kind!r}"])


def run(config, out_dir=None, threads=1):
    """Validate, execute, and persist one experiment with its manifest."""
    problems = validate_config(config)
    if problems:
        raise ConfigError(problems)
    out = Path(out_dir if out_dir is not None else (config.out_dir or "."))
    out.mkdir(parents=True, exist_ok=True)

    config_text = serialize_config(config)
    started = time.monotonic()
    written = _dispatch(config, out, threads)
    elapsed = time.monotonic() - started

    config_path = out / "config.json"
    with open(config_path, "w", newline="") as fh:
        fh.write(config_text)
    outputs = tuple(
        (Path(p).name, serialize.sha256_file(p)) for p in [*written, config_path]
    )
    manifest = RunManifest(
        kind=config.kind,
        config_sha256=serialize.sha256_file(config_path),
        version=__version__,
        wall_clock_seconds=elapsed,
        master_seed=config.master_seed,
        outputs=outputs,
    )
    serialize.write_json(
        out / "manifest.json",
        {
            "kind": manifest.kind,
            "config_sha256": manifest.config_sha256,
            "version": manifest.version,
            "wall_clock_seconds": manifest.wall_clock_seconds,
            "master_seed": manifest.master_seed,
            "outputs": [{"path": name, "sha256": digest} for name, digest in outputs],
        },
    )
    return manifest


def _read_rows(path):
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def summarize(run_dir):
    """Text table of the key statistics in a run directory.

    Also writes plot-data files (x,y,se columns) next to the reports for
    decay and modulus curves. Raises if the manifest is missing or corrupt.
    """
    out = Path(run_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no manifest.json in {out}")
    try:
        manifest = json.loads(manifest_path.read_text())
        names = [entry["path"] for entry in manifest["outputs"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"corrupt manifest in {out}: {exc}") from exc

    lines = [f"run kind: {manifest.get('kind', '?')}", ""]

    if "decay.json" in names:
        summary = json.loads((out / "decay.json").read_text())
        alpha = summary["alpha_hat"]
        shown = "n/a" if alpha is None else f"{alpha:.2f}"
        r2 = summary["r_squared"]
        lines.append(
            f"alpha_hat ≈ {shown}   (r^2 {'n/a' if r2 is None else format(r2, '.3f')},"
            f" order {summary['p']:g}, reps {summary['reps']})"
        )
        if summary["status"] != "ok":
            lines.append(f"status: {summary['status']}")
    if "decay.csv" in names:
        header, rows = _read_rows(out / "decay.csv")
        serialize.write_csv(
            out / "plotdata_decay.csv", ["x", "y", "se"],
            [(r[0], r[1], r[2]) for r in rows],
        )
        lines.append(f"decay curve: {len(rows)} lags -> plotdata_decay.csv")

    if "modulus.csv" in names:
        header, rows = _read_rows(out / "modulus.csv")
        for r in rows:
            lines.append(
                f"modulus delta={float(r[0]):g}: {float(r[3]):.5g} ± {float(r[4]):.3g}"
                f"   (exceed {float(r[5]):.3f}, pairs {r[6]})"
            )
        serialize.write_csv(
            out / "plotdata_modulus.csv", ["x", "y", "se"],
            [(r[0], r[3], r[4]) for r in rows],
        )
        lines.append(f"modulus curve: {len(rows)} deltas -> plotdata_modulus.csv")

    if "probe.csv" in names:
        _, rows = _read_rows(out / "probe.csv")
        for r in rows:
            lines.append(f"probe delta={float(r[0]):g} n={r[2]}: freq {float(r[3]):.3f}")

    if "moment_scaling.csv" in names:
        _, rows = _read_rows(out / "moment_scaling.csv")
        ratios = [float(r[7]) for r in rows]
        lines.append(f"moment ratios: max {max(ratios):.5g}, min {min(ratios):.5g} over {len(rows)} pairs")

    if "quantilogram.json" in names:
        data = json.loads((out / "quantilogram.json").read_text())
        lines.append(
            f"quantilogram alpha={data['alpha']:g} h={data['h']}: scaled statistic"
            f" {data['scaled_statistic']:.5g} (remainder {data['remainder']:.5g})"
        )
    if "m_estimate.json" in names:
        data = json.loads((out / "m_estimate.json").read_text())
        lines.append(f"{data['variant']} estimate: {data['theta_hat']:.6g} (score {data['achieved']:.3g})")
    if "dominance.json" in names:
        data = json.loads((out / "dominance.json").read_text())
        lines.append(
            f"dominance statistic: {data['statistic']:.5g} at theta {data['argmax_theta']:.4g}"
        )
    if "integral.json" in names:
        data = json.loads((out / "integral.json").read_text())
        value = "divergent" if data["divergent"] else f"{data['value']:.6g}"
        lines.append(f"bracketing integral (gamma {data['gamma']:g}, Q {data['Q']}): {value}")
    if "series.csv" in names:
        _, rows = _read_rows(out / "series.csv")
        lines.append(f"simulated series: {len(rows)} rows")

    return "\n".join(lines) + "\n"
