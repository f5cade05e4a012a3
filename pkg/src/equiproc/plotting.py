"""Matplotlib figures rendered next to the delimited report files."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402


def _save(fig, path):
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def decay_figure(report, path):
    """Norm estimates against lag on a log scale, fitted lags highlighted."""
    lags = np.asarray(report.lags)
    est = np.asarray(report.estimates)
    se = np.asarray(report.std_errors)
    used = np.asarray(report.used_in_fit)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    pos = est > 0
    ax.errorbar(
        lags[pos], est[pos], yerr=se[pos], fmt="o", ms=4, lw=1,
        capsize=2, color="#1f6fb4", label="estimate",
    )
    if used.sum() >= 2:
        coef = np.polyfit(lags[used], np.log(est[used]), 1)
        xs = np.linspace(lags[used].min(), lags[used].max(), 50)
        ax.plot(xs, np.exp(np.polyval(coef, xs)), "-", color="#d1495b", lw=1.2, label="fit")
    if pos.any():
        ax.set_yscale("log")
    ax.set_xlabel("lag")
    ax.set_ylabel(f"coupling norm (order {report.norm_order:g})")
    title = f"decay rate {report.alpha_hat:.3f}" if np.isfinite(report.alpha_hat) else report.status
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def modulus_figure(report, path):
    """Supremum moment against delta with exceedance frequencies alongside."""
    deltas = np.asarray(report.deltas)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(
        deltas, report.estimates, yerr=report.std_errors, fmt="o-", ms=4,
        lw=1, capsize=2, color="#1f6fb4", label=f"moment (Q={report.Q})",
    )
    ax.set_xlabel("delta")
    ax.set_ylabel("uniform increment moment")
    ax.set_title(f"n={report.n}, {report.reps} replications")
    ax2 = ax.twinx()
    ax2.plot(deltas, report.exceed_freqs, "s--", ms=3, lw=0.8, color="#66a182")
    ax2.set_ylabel(f"freq |increment| > {report.eta:g}", color="#66a182")
    ax2.set_ylim(-0.02, 1.02)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def probe_figure(report, path):
    """Exceedance frequency against sample size, one line per delta."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for j, d in enumerate(report.deltas):
        ax.plot(report.ns, report.freqs[:, j], "o-", ms=4, lw=1, label=f"delta={d:g}")
    ax.set_xlabel("n")
    ax.set_ylabel(f"freq sup > {report.eta:g}")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"{report.reps} replications")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
