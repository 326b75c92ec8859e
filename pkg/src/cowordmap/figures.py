"""Matplotlib figures written next to the report: eigenvalue scree plot and contingency heatmap."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# no timestamp or version stamp, so reruns give the same bytes
_PNG_META = {"Software": None}


def scree_plot(eigenvalues: Sequence[float], k: int, path: str | Path) -> Path:
    """Eigenvalues of the correlation matrix in descending order; the first ``k`` are highlighted."""
    vals = np.asarray(eigenvalues, dtype=float)
    x = np.arange(1, len(vals) + 1)
    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    ax.plot(x, vals, marker="o", markersize=3, color="#4e79a7")
    ax.plot(x[:k], vals[:k], marker="o", linestyle="none", color="#e15759", label=f"retained ({k})")
    ax.axhline(1.0, color="#999999", linewidth=0.8, linestyle="--")
    ax.set_xlabel("component")
    ax.set_ylabel("eigenvalue")
    ax.set_title("Scree plot")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return Path(path)


def contingency_heatmap(
    table: Sequence[Sequence[int]],
    row_labels: Sequence,
    col_labels: Sequence,
    path: str | Path,
    title: str = "",
    row_name: str = "topic",
    col_name: str = "cluster",
) -> Path:
    counts = np.asarray(table, dtype=float)
    fig, ax = plt.subplots(figsize=(1.2 + 0.6 * counts.shape[1], 1.2 + 0.6 * counts.shape[0]), dpi=100)
    ax.imshow(counts, cmap="Blues", aspect="auto")
    ax.set_xticks(range(len(col_labels)), [str(c) for c in col_labels])
    ax.set_yticks(range(len(row_labels)), [str(r) for r in row_labels])
    ax.set_xlabel(col_name)
    ax.set_ylabel(row_name)
    top = counts.max() if counts.size else 0
    for (i, j), v in np.ndenumerate(counts):
        ax.text(j, i, f"{int(v)}", ha="center", va="center",
                color="white" if top and v > top / 2 else "black", fontsize=8)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return Path(path)
