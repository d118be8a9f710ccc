"""Render figures for the report path: value histogram, yearly counts,
rank-value log-log tails, and avalanche-size distributions.

Figures are saved to files next to the delimited outputs; nothing here is
interactive.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .detector import Histogram, YearSummary
from .entropy import MBIT
from .scaling import TailFit


def save_histogram_figure(hist: Histogram, path: str, title: str = "Distribution of U values") -> None:
    centers = []
    widths = []
    finite = hist.bin_edges[1:-1]
    for lo, hi in zip(finite[:-1], finite[1:]):
        centers.append((lo + hi) / 2.0 / MBIT)
        widths.append((hi - lo) / MBIT)
    counts = hist.counts[1:-1]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.bar(centers, counts, width=widths, color="#4878d0", edgecolor="none")
    ax.set_xlabel("U (millibit)")
    ax.set_ylabel("number of links")
    ax.set_yscale("symlog")
    ax.set_title(title)
    note = f"underflow {hist.counts[0]}, overflow {hist.counts[-1]}"
    ax.annotate(note, xy=(0.02, 0.95), xycoords="axes fraction", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_year_counts_figure(summaries: Sequence[YearSummary], path: str) -> None:
    years = [s.eval_year for s in summaries]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(years, [s.n_links for s in summaries], "k-", label="links")
    ax.plot(years, [s.n_critical_fwd for s in summaries], "r-", label="critical (fwd)")
    ax.plot(years, [s.n_critical_bwd for s in summaries], "r--", label="critical (bwd)")
    ax.plot(years, [s.n_improved_fwd for s in summaries], "b-", label="improved (fwd)")
    ax.plot(years, [s.n_improved_bwd for s in summaries], "b--", label="improved (bwd)")
    ax.set_xlabel("evaluation year")
    ax.set_ylabel("number of observations")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_tail_figure(
    values: Sequence[float],
    fit: TailFit,
    path: str,
    label: str = "tail",
) -> None:
    arr = np.asarray(values, dtype=float)
    ranks = np.arange(1, arr.size + 1)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(ranks, arr, ".", ms=3, label=label)
    model = 2.0 ** (fit.intercept - fit.exponent * np.log2(ranks))
    ax.loglog(
        ranks,
        model,
        "k--",
        lw=1,
        label=f"slope {-fit.exponent:.3f}, $r^2$={fit.r2:.4f}",
    )
    ax.set_xlabel("rank")
    ax.set_ylabel("|value|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_avalanche_figure(sizes: Sequence[int], fit: TailFit | None, path: str) -> None:
    arr = np.sort(np.asarray([s for s in sizes if s > 0], dtype=float))[::-1]
    ranks = np.arange(1, arr.size + 1)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(ranks, arr, ".", ms=2, label="avalanche sizes")
    if fit is not None:
        k = fit.k
        model = 2.0 ** (fit.intercept - fit.exponent * np.log2(ranks[:k]))
        ax.loglog(ranks[:k], model, "k--", lw=1, label=f"top-{k} slope {-fit.exponent:.3f}")
    ax.set_xlabel("rank")
    ax.set_ylabel("size (topplings)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
