"""Matplotlib renderings for the report paths; every figure lands next to its CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def scatter_figure(q_of_i, est, band: float, path: str | Path) -> Path:
    """Estimate-versus-truth scatter with the y = x line and an error band."""
    q = np.asarray(q_of_i, dtype=float)
    e = np.asarray(est, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.scatter(q, e, s=6, alpha=0.4, linewidths=0, label="queries")
    lo = min(q.min(), e.min())
    hi = max(q.max(), e.max())
    line = np.array([lo, hi])
    ax.plot(line, line, color="black", linewidth=1.0, label="y = x")
    ax.plot(line, line + band, color="gray", linewidth=0.8, linestyle="--", label=f"±{band:g}")
    ax.plot(line, line - band, color="gray", linewidth=0.8, linestyle="--")
    ax.set_xlabel("true count")
    ax.set_ylabel("estimate")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def sd_figure(per_query_sd, threshold: float, path: str | Path) -> Path:
    """Sorted per-query statistical differences against the meaninglessness threshold."""
    sd = np.sort(np.asarray(per_query_sd, dtype=float))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(np.arange(1, len(sd) + 1), sd, linewidth=1.2)
    ax.axhline(threshold, color="gray", linestyle="--", linewidth=0.8, label=f"threshold {threshold:g}")
    ax.set_xlabel("query (sorted)")
    ax.set_ylabel("statistical difference")
    ax.set_ylim(-0.05, 2.05)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def sweep_figure(gaps, fractions, path: str | Path) -> Path:
    """Fraction of near-indistinguishable queries as the retention/insertion gap grows."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(np.asarray(gaps, dtype=float), np.asarray(fractions, dtype=float), marker="o")
    ax.set_xlabel("alpha - beta")
    ax.set_ylabel("fraction of queries below threshold")
    ax.set_ylim(-0.05, 1.05)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def frontier_figure(gammas, thresholds, path: str | Path) -> Path:
    """Prior-bound frontier as a function of the posterior bound."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(np.asarray(gammas, dtype=float), np.asarray(thresholds, dtype=float), marker="o")
    ax.set_xlabel("gamma")
    ax.set_ylabel("prior threshold d")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
