"""Report figures rendered next to the delimited outputs.

matplotlib is imported lazily with the Agg backend so library users who
never render reports do not pay for it.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def training_curves(log: Sequence, path: str | Path) -> None:
    """Loss and validation metrics per epoch."""
    plt = _plt()
    epochs = [e.epoch for e in log]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(epochs, [e.train_loss for e in log], marker="o", ms=3, label="train loss")
    ax1.plot(epochs, [e.val_loss for e in log], marker="s", ms=3, label="val loss")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("loss")
    ax1.legend(frameon=False)
    ax2.plot(epochs, [e.val_accuracy for e in log], marker="o", ms=3, label="val accuracy")
    ax2.plot(epochs, [e.val_f1 for e in log], marker="s", ms=3, label="val F1")
    ax2.set_xlabel("epoch")
    ax2.set_ylim(0, 1.02)
    ax2.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def confusion_heatmap(counts: np.ndarray, path: str | Path) -> None:
    """Confusion matrix with per-cell counts."""
    plt = _plt()
    counts = np.asarray(counts)
    fig, ax = plt.subplots(figsize=(4.2, 3.8))
    im = ax.imshow(counts, cmap="Blues")
    for (i, j), value in np.ndenumerate(counts):
        colour = "white" if value > counts.max() / 2 else "black"
        ax.text(j, i, str(int(value)), ha="center", va="center", color=colour)
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    ax.set_xticks(range(counts.shape[1]))
    ax.set_yticks(range(counts.shape[0]))
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def infogain_bars(
    property_rows: Sequence[tuple[str, float]],
    category_rows: Sequence[tuple[str, float]],
    path: str | Path,
) -> None:
    """Horizontal bars: per-category means on top, per-property gains below."""
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(7.5, 2.2 + 0.28 * len(property_rows)),
        height_ratios=[len(category_rows), len(property_rows)],
    )
    for ax, rows, title in (
        (ax1, category_rows, "mean information gain per category"),
        (ax2, property_rows, "information gain per property"),
    ):
        names = [name for name, _ in rows][::-1]
        gains = [gain for _, gain in rows][::-1]
        ax.barh(names, gains, color="#4878a8")
        ax.set_title(title, fontsize=10)
        ax.set_xlabel("bits")
        ax.tick_params(labelsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
