"""Figure rendering for experiment reports.

Uses the Agg backend so figures render headlessly to files next to the
delimited output; nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_CODIM_LABELS = ["0", "1", "2", "3", ">3"]


def save_experiment_figure(table, path: str) -> None:
    """Grouped bar chart of face-codimension counts, one series per N."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    width = 0.8 / max(len(table.sample_sizes), 1)
    for pos, n_samp in enumerate(table.sample_sizes):
        counts = table.counts[n_samp]
        xs = [k + pos * width for k in range(len(_CODIM_LABELS))]
        ax.bar(xs, counts, width=width, label=f"N = {n_samp}")
    ax.set_xticks([k + 0.4 - width / 2 for k in range(len(_CODIM_LABELS))])
    ax.set_xticklabels(_CODIM_LABELS)
    ax.set_xlabel("face codimension of the estimate")
    ax.set_ylabel(f"replicates (of {table.reps})")
    ax.legend(frameon=False)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
