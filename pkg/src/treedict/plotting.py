"""Matplotlib figures written next to the CSV reports."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (6.0, 3.7),
    "savefig.dpi": 150,
}


def _save(fig, path):
    tmp = f"{path}.tmp.png"
    fig.savefig(tmp, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    os.replace(tmp, path)


def plot_timing(sizes, seconds, path, labels=None):
    """Learning time against the number of training patches (log scale)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        series = seconds if labels else [seconds]
        for i, ys in enumerate(series):
            ax.plot(sizes, ys, marker="o", label=labels[i] if labels else None)
        ax.set_yscale("log")
        ax.set_xlabel("number of training patches")
        ax.set_ylabel("time [s]")
        if labels:
            ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        _save(fig, path)


def plot_eta(eta, levels, path):
    """Atom usage grouped by tree level; red lines and numbers mark each level block.

    Atoms are sorted by level (stable, so build order is kept within a level).
    """
    eta, levels = np.asarray(eta, dtype=float), np.asarray(levels)
    perm = np.argsort(levels, kind="stable")
    eta, levels = eta[perm], levels[perm]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.bar(np.arange(len(eta)), eta, width=1.0, color="0.3")
        positive = eta[eta > 0]
        logscale = positive.size > 0 and positive.max() > 100 * positive.min()
        if logscale:
            ax.set_yscale("log")
            lo, top = positive.min() / 2, positive.max() * 4
        else:
            lo, top = 0.0, (eta.max() if positive.size else 1.0) * 1.1
        ax.set_ylim(lo, top)
        starts = [0] + [i for i in range(1, len(levels)) if levels[i] != levels[i - 1]]
        for s in starts[:len(levels)]:
            ax.axvline(s - 0.5, color="red", lw=0.8)
            ax.text(s - 0.5, top, f" {int(levels[s])}", color="red", fontsize=7, ha="left", va="bottom")
        ax.set_xlim(-0.5, max(len(eta), 1) - 0.5)
        ax.set_xlabel("atom (grouped by tree level)")
        ax.set_ylabel(r"$\eta_k$")
        _save(fig, path)


def plot_psnr(sparsities, values, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        finite = [v if np.isfinite(v) else np.nan for v in values]
        ax.plot(sparsities, finite, marker="o")
        ax.set_xlabel("sparsity S")
        ax.set_ylabel("PSNR [dB]")
        ax.grid(True, alpha=0.3)
        _save(fig, path)
