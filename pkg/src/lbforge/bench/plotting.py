"""Primal-integral evolution plot."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_curves(curves: dict, path) -> None:
    """One line per algorithm of the geometric-mean P(t) against time."""
    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    for algo, pts in curves.items():
        if pts:
            ax.plot([t for t, _ in pts], [p for _, p in pts], label=algo)
    ax.set_xlabel("time (node-budget seconds)")
    ax.set_ylabel("primal integral P(t)")
    ax.legend(loc="upper left", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
