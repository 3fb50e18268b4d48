"""Matplotlib figures for experiment reports. Files are written without timestamps."""

from __future__ import annotations

import io
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from simplexseg.evaluation import RocCurve  # noqa: E402
from simplexseg.io import atomic_write  # noqa: E402

_PNG_META = {"Software": None}


def _save(fig, path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=100, metadata=_PNG_META)
    plt.close(fig)
    atomic_write(path, buf.getvalue())


def plot_roc(curves: Mapping[str, RocCurve], path, title: str = "OOD detection") -> None:
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for name, roc in curves.items():
        ax.plot(roc.fpr, roc.tpr, label=f"{name} (AUC {roc.auc:.3f})")
    ax.plot([0, 1], [0, 1], color="0.6", linestyle=":", linewidth=1)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title(title)
    ax.legend(loc="lower right", frameon=False)
    fig.tight_layout()
    _save(fig, path)


def plot_losses(losses: Mapping[str, list[float]], path) -> None:
    fig, axes = plt.subplots(1, len(losses), figsize=(4 * len(losses), 3), squeeze=False)
    for ax, (name, values) in zip(axes[0], losses.items()):
        ax.plot(np.arange(1, len(values) + 1), values)
        ax.set_xlabel("epoch")
        ax.set_ylabel("mean loss")
        ax.set_title(name)
    fig.tight_layout()
    _save(fig, path)


def plot_uncertainty_maps(maps: Mapping[str, np.ndarray], num_classes: int, path, labels=None) -> None:
    """Side-by-side uncertainty panels on a shared ``[0, 1 - 1/N]`` grey scale."""
    panels = ([("labels", labels)] if labels is not None else []) + list(maps.items())
    fig, axes = plt.subplots(1, len(panels), figsize=(3 * len(panels), 3.2), squeeze=False)
    top = 1.0 - 1.0 / num_classes
    for ax, (name, img) in zip(axes[0], panels):
        if name == "labels":
            ax.imshow(img, cmap="tab10", interpolation="nearest")
        else:
            ax.imshow(img, cmap="gray", vmin=0.0, vmax=top, interpolation="nearest")
        ax.set_title(name)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    _save(fig, path)
