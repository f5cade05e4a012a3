"""Deterministic text output: CSV and JSON writers shared by every report.

Floats render with 17 significant digits and lines end with a bare newline,
so identical runs produce identical bytes. JSON keys keep insertion order;
non-finite floats map to null.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np


def fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return format(x, ".17g")


def csv_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return str(value)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(csv_cell(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def json_text(obj):
    return _json_value(obj, 0) + "\n"


def _json_value(obj, depth):
    pad = "  " * depth
    inner = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(k))}: {_json_value(v, depth + 1)}" for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        parts = [f"{inner}{_json_value(v, depth + 1)}" for v in seq]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        return fmt_float(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj):
    with open(path, "w", newline="") as fh:
        fh.write(json_text(obj))
    return path


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def param_label(theta):
    parts = np.atleast_1d(np.asarray(theta, dtype=float))
    return ";".join(fmt_float(p) for p in parts)


def write_decay_report(report, csv_path, json_path, seed):
    write_csv(
        csv_path,
        ["lag", "estimate", "se", "used_in_fit"],
        zip(report.lags, report.estimates, report.std_errors, report.used_in_fit),
    )
    write_json(
        json_path,
        {
            "alpha_hat": report.alpha_hat,
            "slope": report.slope,
            "intercept": report.intercept,
            "r_squared": report.r_squared,
            "p": report.norm_order,
            "reps": report.reps,
            "seed": int(seed),
            "status": report.status,
        },
    )
    return csv_path, json_path


def write_modulus_report(report, path):
    rows = [
        (d, report.n, report.Q, est, se, freq, pairs)
        for d, est, se, freq, pairs in zip(
            report.deltas, report.estimates, report.std_errors,
            report.exceed_freqs, report.pair_counts,
        )
    ]
    return write_csv(path, ["delta", "n", "Q", "estimate", "se", "exceed_freq", "pairs"], rows)


def write_probe_report(report, path):
    rows = [
        (d, report.eta, n, report.freqs[i, j], report.pair_counts[j])
        for i, n in enumerate(report.ns)
        for j, d in enumerate(report.deltas)
    ]
    return write_csv(path, ["delta", "eta", "n", "freq", "pairs"], rows)


def write_moment_scaling_report(report, path):
    rows = [
        (
            param_label(a), param_label(b), report.rho_values[k], report.taus[k],
            report.n, report.Q, report.moments[k], report.ratios[k],
        )
        for k, (a, b) in enumerate(report.pairs)
    ]
    return write_csv(
        path,
        ["theta", "theta_prime", "rho_hat", "tau", "n", "Q", "moment", "ratio"],
        rows,
    )


def write_cover_report(cover, check, path):
    centers = np.atleast_2d(np.asarray(cover.centers, dtype=float))
    if centers.shape[0] == 1 and cover.size > 1:
        centers = centers.T
    dims = centers.shape[1]
    header = ["k"] + [f"center_{d}" for d in range(dims)] + ["rho_hat", "rho_se"]
    rows = [
        (k, *centers[k], check.sizes[k], check.size_ses[k])
        for k in range(cover.size)
    ]
    return write_csv(path, header, rows)


def write_quantilogram_result(result, path):
    return write_json(
        path,
        {
            "alpha": result.alpha,
            "h": result.h,
            "n": result.n,
            "theta_hat": result.theta_hat,
            "theta_star": result.theta_star,
            "statistic": result.statistic,
            "scaled_statistic": result.scaled_statistic,
            "drift": result.drift,
            "nu_at_quantile": result.nu_at_quantile,
            "remainder": result.remainder,
            "mean_at_quantile": result.mean_at_quantile,
            "identity_gap": result.identity_gap(),
        },
    )


def write_m_estimate_result(result, path):
    return write_json(
        path,
        {
            "variant": result.variant,
            "theta_hat": result.theta_hat,
            "residual_score": result.residual_score,
            "achieved": result.achieved,
        },
    )


def write_dominance_result(result, csv_path, json_path):
    write_csv(csv_path, ["theta", "value"], zip(result.theta_grid, result.values))
    write_json(
        json_path,
        {
            "statistic": result.statistic,
            "argmax_index": result.argmax_index,
            "argmax_theta": result.argmax_theta,
            "grid_size": len(result.theta_grid),
        },
    )
    return csv_path, json_path


def write_integral_result(result, gamma, Q, path):
    return write_json(
        path,
        {
            "value": result.value,
            "divergent": result.divergent,
            "exponent": result.exponent,
            "gamma": gamma,
            "Q": Q,
        },
    )


def write_series(block, path):
    block = np.asarray(block, dtype=float)
    if block.ndim == 2:
        block = block[:, :, None]
    header = ["replication", "t"] + [f"x_{d}" for d in range(block.shape[2])]
    rows = (
        (r, t, *block[r, t])
        for r in range(block.shape[0])
        for t in range(block.shape[1])
    )
    return write_csv(path, header, rows)
