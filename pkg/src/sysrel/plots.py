"""Figure rendering for the CLI report paths (static files only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path: str | Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_curves(path, labeled_curves, truth=None, title="Estimated system reliability"):
    """Step plot of (label, times, values) curves, optional smooth truth."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    t_max = 1.0
    for label, times, values in labeled_curves:
        t = np.concatenate(([0.0], times)) if times.size == 0 or times[0] > 0 else times
        v = np.concatenate(([1.0], values)) if t.size != times.size else values
        ax.step(t, v, where="post", label=label)
        if t.size:
            t_max = max(t_max, float(t[-1]))
    if truth is not None:
        grid = np.linspace(0.0, t_max, 400)
        ax.plot(grid, truth.survival(grid), "k--", lw=1, label="true")
    ax.set_xlabel("t")
    ax.set_ylabel("R(t)")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    ax.set_title(title)
    _finish(fig, path)


def plot_risk_profile(path, cs, risks, c_star, method):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(cs, risks, marker=".", ms=3, lw=1)
    ax.axvline(c_star, color="crimson", lw=1, ls="--", label=f"c* = {c_star:.4f}")
    ax.set_xlabel("shrinkage coefficient c")
    ax.set_ylabel("estimated risk")
    ax.set_title(f"Estimated risk profile ({method})")
    ax.legend()
    _finish(fig, path)


def plot_scenario(path, result):
    """Mean risk per method with one-sd whiskers for a single scenario."""
    methods = list(result.methods)
    means = [result.methods[m].mean_risk for m in methods]
    sds = [result.methods[m].sd_risk for m in methods]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = np.arange(len(methods))
    ax.bar(x, means, yerr=sds, capsize=4, color="steelblue")
    ax.set_xticks(x, methods, rotation=20)
    ax.set_ylabel("mean estimated risk")
    ax.set_title(result.label)
    _finish(fig, path)


def plot_sweep(path, axis, results, shrink_method):
    """Mean c* and risk-efficiency across a sweep, one panel each."""
    labels = [r.label.split("=", 1)[1] for r in results]
    means = [r.methods[shrink_method].mean_cstar for r in results]
    effs = [r.methods[shrink_method].risk_efficiency_pct for r in results]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(labels, means, marker="o")
    ax1.axhline(1.0, color="gray", lw=0.8, ls=":")
    ax1.set_xlabel(axis)
    ax1.set_ylabel("mean c*")
    if all(e is not None for e in effs):
        ax2.plot(labels, effs, marker="o", color="seagreen")
    ax2.set_xlabel(axis)
    ax2.set_ylabel("risk efficiency (%)")
    fig.suptitle(f"Shrinkage behavior across {axis}")
    _finish(fig, path)
