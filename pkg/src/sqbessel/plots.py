"""Figure rendering for CLI reports; every plot goes to a file (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .pricing import MomentReport
from .specfun import noncentral_chi2_pdf

_FIGSIZE = (7.0, 4.5)


def plot_moment_errors(report: MomentReport, path: str) -> None:
    """Relative moment errors with jackknife error bars on a log axis."""
    ks = np.arange(1, len(report.rel_errors) + 1)
    rel = np.asarray(report.rel_errors)
    bars = np.asarray(report.jackknife_se) / np.asarray(report.analytic)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.errorbar(ks, rel, yerr=5.0 * bars, fmt="o-", capsize=3,
                label="sample vs analytic")
    ax.set_yscale("log")
    ax.set_xlabel("moment order k")
    ax.set_ylabel("relative error")
    ax.set_title(
        f"first {len(ks)} moments: delta={report.params.delta}, "
        f"lam={report.params.lam}, n={report.n_samples:.0e}"
    )
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep_h(rows: list[dict], path: str) -> None:
    """Relative error against Euler step length (fixed path count)."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    by_scheme: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        by_scheme.setdefault(row["scheme"], []).append(
            (row["h"], row["rel_error"]))
    for scheme, pts in by_scheme.items():
        pts.sort()
        hs = [p[0] for p in pts]
        errs = [p[1] for p in pts]
        ax.loglog(hs, errs, "o-", label=scheme)
    ax.set_xlabel("timestep h")
    ax.set_ylabel("relative error")
    ax.set_title("put pricing error vs timestep")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep_paths(rows: list[dict], path: str) -> None:
    """Accuracy / CPU trade-off for two coefficient accuracies."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.5))
    by_label: dict[str, list[dict]] = {}
    for row in rows:
        by_label.setdefault(row["coeffs"], []).append(row)
    for label, entries in by_label.items():
        entries.sort(key=lambda r: r["n_paths"])
        ns = [r["n_paths"] for r in entries]
        ax1.loglog(ns, [r["rel_error"] for r in entries], "o-", label=label)
        ax2.loglog(ns, [max(r["elapsed_s"], 1e-6) for r in entries], "o-",
                   label=label)
    ax1.set_xlabel("paths")
    ax1.set_ylabel("relative error")
    ax1.grid(True, which="both", alpha=0.3)
    ax1.legend()
    ax2.set_xlabel("paths")
    ax2.set_ylabel("CPU seconds")
    ax2.grid(True, which="both", alpha=0.3)
    ax2.legend()
    fig.suptitle("put pricing: accuracy and cost vs path count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sample_histogram(samples: np.ndarray, delta: float, lam: float,
                          path: str) -> None:
    """Sample histogram against the analytic density (right of the spike)."""
    from .specfun import NoncentralParams

    law = NoncentralParams(delta, lam)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    lo = max(np.percentile(samples, 25), 1e-3)
    hi = np.percentile(samples, 99.5)
    grid = np.linspace(lo, hi, 200)
    pdf = [noncentral_chi2_pdf(law, float(v)) for v in grid]
    ax.hist(samples[(samples >= lo) & (samples <= hi)], bins=120,
            density=True, alpha=0.5, label="samples")
    # histogram density is conditional on the plotted window
    mass = np.mean((samples >= lo) & (samples <= hi))
    ax.plot(grid, np.asarray(pdf) / max(mass, 1e-12), "r-",
            label="analytic density / window mass")
    ax.set_xlabel("value")
    ax.set_ylabel("density")
    ax.set_title(f"chi-square samples, delta={delta}, lam={lam}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
