"""Figure rendering for the report commands.

Each function writes one PNG next to the delimited output the CLI already
emits; nothing here is interactive.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from rppa_lab.bounds import (
    Measure,
    upper_constant_fval,
    upper_right_silver_fval,
    upper_tv_fval,
)

__all__ = ["save_bound_decay_figure", "save_tightness_figure", "save_sweep_figure"]


def save_bound_decay_figure(path, lam: float = 1.0, max_m: int = 10) -> Path:
    """Log-log decay of the value-measure bounds versus iteration count."""
    ns = [2**k for k in range(0, max_m + 1)]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(ns, [upper_constant_fval(1.0, n, lam) for n in ns], "o-", label="constant 1")
    ax.loglog(ns, [upper_constant_fval(math.sqrt(2.0), n, lam) for n in ns],
              "s-", label="constant sqrt(2)")
    ax.loglog(ns, [upper_tv_fval(n, lam) for n in ns], "^-", label="tv")
    ax.loglog([2**m for m in range(0, max_m + 1)],
              [upper_right_silver_fval(m, lam) for m in range(0, max_m + 1)],
              "d-", label="right silver")
    ax.set_xlabel("N")
    ax.set_ylabel("value-residual bound")
    ax.set_title(f"Bound decay (lambda = {lam:g})")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    path = Path(path)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_tightness_figure(path, rows) -> Path:
    """Achieved vs bound vs external reference, one group per level m.

    ``rows`` are dicts with keys m, bound, achieved, external.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ms = [r["m"] for r in rows]
    width = 0.27
    ax.bar([m - width for m in ms], [r["bound"] for r in rows], width, label="bound")
    ax.bar(ms, [r["achieved"] for r in rows], width, label="achieved")
    ax.bar([m + width for m in ms], [r["external"] for r in rows], width, label="external search")
    ax.set_xticks(ms)
    ax.set_xlabel("m")
    ax.set_ylabel("value residual / squared distance")
    ax.set_title("Right-silver tightness")
    ax.legend()
    path = Path(path)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_sweep_figure(path, records) -> Path:
    """Scatter of achieved/bound margins per measure across a sweep.

    ``records`` are dicts with keys measure and ratio (achieved / bound).
    """
    order = [m.value for m in Measure]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for i, name in enumerate(order):
        ratios = [r["ratio"] for r in records if r["measure"] == name]
        ax.scatter([i] * len(ratios), ratios, s=12, alpha=0.6)
    ax.axhline(1.0, color="k", lw=1, ls="--", label="bound")
    ax.set_xticks(range(len(order)))
    ax.set_xticklabels(order, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("achieved / bound")
    ax.set_title("Upper-bound sweep margins")
    ax.legend()
    path = Path(path)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
