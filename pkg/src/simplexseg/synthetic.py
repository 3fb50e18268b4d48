"""Deterministic synthetic feature maps standing in for a segmentation backbone.

Class ``c`` has mean ``(s / sqrt 2) e_c`` so every pair of class means is
exactly ``s`` apart. The out-of-distribution mean sits at
``-ood_shift * unit(mean of class means)``. Pixel features are their region's
mean plus ``sigma`` times Box-Muller normals from SplitMix64 seeded with
``cfg.seed``, filled row-major with channels innermost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from simplexseg.head import OOD_LABEL
from simplexseg.rng import SplitMix64


@dataclass(frozen=True)
class SynthConfig:
    num_classes: int = 6
    depth: int = 32
    height: int = 64
    width: int = 64
    class_separation: float = 4.0
    noise_sigma: float = 1.0
    ood_shift: float = 8.0
    seed: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.depth < 2:
            raise ValueError("depth must be >= 2")
        if self.height < 1 or self.width < 1:
            raise ValueError("height and width must be positive")
        if not self.class_separation > 0 or not self.noise_sigma > 0:
            raise ValueError("class_separation and noise_sigma must be positive")
        if not self.ood_shift > self.class_separation:
            raise ValueError("ood_shift must exceed class_separation")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Region:
    """Half-open pixel rectangle ``[x0, x1) x [y0, y1)`` with a class index or ``OOD_LABEL``."""

    x0: int
    y0: int
    x1: int
    y1: int
    label: int


@dataclass
class LabeledScene:
    features: np.ndarray  # (H, W, D)
    labels: np.ndarray  # (H, W) int, OOD_LABEL where out-of-distribution


def make_class_means(cfg: SynthConfig, with_ood: bool = True) -> tuple[np.ndarray, np.ndarray | None]:
    """Return ``(class_means (N, D), ood_mean (D,) or None)``."""
    n, d = cfg.num_classes, cfg.depth
    if d < n or (with_ood and d < n + 1):
        need = n + 1 if with_ood else n
        raise ValueError(f"depth {d} too small: need {need} basis directions")
    means = np.zeros((n, d))
    means[np.arange(n), np.arange(n)] = cfg.class_separation / math.sqrt(2.0)
    if not with_ood:
        return means, None
    centre = means.mean(axis=0)
    norm = np.linalg.norm(centre)
    if norm > 0:
        ood = -cfg.ood_shift * centre / norm
    else:
        ood = np.zeros(d)
        ood[n] = cfg.ood_shift
    return means, ood


def _label_grid(cfg: SynthConfig, layout: Sequence[Region]) -> np.ndarray:
    cover = np.zeros((cfg.height, cfg.width), dtype=np.int64)
    labels = np.full((cfg.height, cfg.width), OOD_LABEL, dtype=np.int64)
    for r in layout:
        if not (0 <= r.x0 < r.x1 <= cfg.width and 0 <= r.y0 < r.y1 <= cfg.height):
            raise ValueError(f"region {r} lies outside the {cfg.width}x{cfg.height} grid or is empty")
        if r.label != OOD_LABEL and not 0 <= r.label < cfg.num_classes:
            raise ValueError(f"region {r} has label outside 0..{cfg.num_classes - 1}")
        cover[r.y0:r.y1, r.x0:r.x1] += 1
        labels[r.y0:r.y1, r.x0:r.x1] = r.label
    if (cover > 1).any():
        raise ValueError("layout regions overlap")
    if (cover == 0).any():
        raise ValueError("layout regions do not cover the grid")
    return labels


def generate_scene(cfg: SynthConfig, layout: Sequence[Region]) -> LabeledScene:
    """Build a scene whose regions follow ``layout``; fully determined by ``(cfg, layout)``."""
    labels = _label_grid(cfg, layout)
    has_ood = bool((labels == OOD_LABEL).any())
    means, ood = make_class_means(cfg, with_ood=has_ood)
    table = means if ood is None else np.vstack([means, ood])
    # OOD_LABEL == -1 indexes the last row, which is the OOD mean when present
    base = table[labels]
    noise = SplitMix64(cfg.seed).normal(cfg.height * cfg.width * cfg.depth)
    features = base + cfg.noise_sigma * noise.reshape(cfg.height, cfg.width, cfg.depth)
    return LabeledScene(features, labels)


def grid_layout(height: int, width: int, rows: Sequence[Sequence[int]]) -> list[Region]:
    """Split the grid into equal-ish bands (``rows``) and columns, one region per label."""
    regions = []
    ys = np.linspace(0, height, len(rows) + 1).round().astype(int)
    for band, row in enumerate(rows):
        xs = np.linspace(0, width, len(row) + 1).round().astype(int)
        for col, label in enumerate(row):
            regions.append(Region(int(xs[col]), int(ys[band]), int(xs[col + 1]), int(ys[band + 1]), int(label)))
    return regions
