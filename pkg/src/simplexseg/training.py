"""Training of the prototype head (cosine alignment) and the baseline classifier head.

Both heads are trained on frozen feature maps with plain mini-batch SGD.
Randomness (initialisation and per-epoch pixel shuffling) is drawn from one
SplitMix64 stream seeded by ``TrainConfig.seed``: first ``D*K`` uniforms for
the weight (row-major), then ``K`` for the bias, then ``M`` keys per epoch
whose stable argsort gives the visiting order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from simplexseg.head import OOD_LABEL, ProjectionHead, classify, project, score
from simplexseg.rng import SplitMix64

log = logging.getLogger(__name__)

ZERO_NORM = 1e-12


@dataclass
class TrainConfig:
    learning_rate: float = 1e-2
    epochs: int = 50
    batch_pixels: int = 4096
    seed: int = 0
    init_scale: float | None = None  # None means sqrt(1/D)

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if int(self.batch_pixels) != self.batch_pixels or self.batch_pixels < 1:
            raise ValueError("batch_pixels must be a positive integer")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.init_scale is not None and not self.init_scale > 0:
            raise ValueError("init_scale must be positive")


@dataclass
class TrainReport:
    loss_per_epoch: list[float] = field(default_factory=list)
    final_train_accuracy: float = 0.0

    def to_csv(self) -> str:
        lines = ["epoch,loss"]
        lines += [f"{i + 1},{loss!r}" for i, loss in enumerate(self.loss_per_epoch)]
        return "\n".join(lines) + "\n"


def _counted(features, labels):
    f = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if f.shape[:-1] != y.shape:
        raise ValueError(f"feature grid {f.shape[:-1]} and label grid {y.shape} differ")
    f = f.reshape(-1, f.shape[-1])
    y = y.reshape(-1).astype(np.int64)
    keep = y != OOD_LABEL
    if not keep.any():
        raise ValueError("no labelled (non-OOD) pixels to evaluate")
    return f[keep], y[keep]


def _check_labels(y, num_classes):
    if y.min() < 0 or y.max() >= num_classes:
        raise ValueError(f"labels must lie in 0..{num_classes - 1} or be the OOD marker")


def _cosine_terms(z, q):
    """Per-pixel cosine and d(-cos)/dz, zero for near-zero projections."""
    norm = np.linalg.norm(z, axis=1)
    live = norm >= ZERO_NORM
    safe = np.where(live, norm, 1.0)
    qn = q / np.linalg.norm(q, axis=1, keepdims=True)
    dot = np.einsum("ij,ij->i", z, qn)
    cos = np.where(live, dot / safe, 0.0)
    grad = -(qn / safe[:, None] - (dot / safe**3)[:, None] * z)
    grad[~live] = 0.0
    return cos, grad


def cosine_loss(head: ProjectionHead, prototypes: np.ndarray, features, labels) -> float:
    """Negative mean cosine between each labelled pixel's projection and its class prototype."""
    f, y = _counted(features, labels)
    _check_labels(y, prototypes.shape[1])
    cos, _ = _cosine_terms(project(head, f), prototypes.T[y])
    return float(-cos.mean())


def cosine_loss_gradient(head: ProjectionHead, prototypes: np.ndarray, features, labels):
    """Analytic gradient of :func:`cosine_loss`; returns ``(d_weight, d_bias)``."""
    f, y = _counted(features, labels)
    _check_labels(y, prototypes.shape[1])
    _, g = _cosine_terms(project(head, f), prototypes.T[y])
    g /= len(y)
    return f.T @ g, g.sum(axis=0)


def _log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy_loss(head: ProjectionHead, features, labels) -> float:
    f, y = _counted(features, labels)
    _check_labels(y, head.out_dim)
    logp = _log_softmax(project(head, f))
    return float(-logp[np.arange(len(y)), y].mean())


def cross_entropy_gradient(head: ProjectionHead, features, labels):
    f, y = _counted(features, labels)
    _check_labels(y, head.out_dim)
    g = np.exp(_log_softmax(project(head, f)))
    g[np.arange(len(y)), y] -= 1.0
    g /= len(y)
    return f.T @ g, g.sum(axis=0)


def _stack_corpus(corpus: Iterable[tuple[np.ndarray, np.ndarray]]):
    feats, labs = [], []
    depth = None
    for features, labels in corpus:
        features = np.asarray(features, dtype=np.float64)
        if depth is None:
            depth = features.shape[-1]
        elif features.shape[-1] != depth:
            raise ValueError(f"inconsistent feature depths: {depth} and {features.shape[-1]}")
        f, y = _counted(features, labels)
        feats.append(f)
        labs.append(y)
    if not feats:
        raise ValueError("training corpus is empty")
    return np.concatenate(feats), np.concatenate(labs)


def _init_head(rng: SplitMix64, in_dim: int, out_dim: int, cfg: TrainConfig) -> ProjectionHead:
    a = cfg.init_scale if cfg.init_scale is not None else math.sqrt(1.0 / in_dim)
    weight = rng.uniform_range(-a, a, in_dim * out_dim).reshape(in_dim, out_dim)
    bias = rng.uniform_range(-a, a, out_dim)
    return ProjectionHead(weight, bias)


def _sgd(f, y, head, rng, cfg, step_fn):
    """Shared SGD loop; ``step_fn(head, f_batch, y_batch) -> (loss, dW, db)``."""
    losses = []
    m = len(y)
    for epoch in range(cfg.epochs):
        order = rng.permutation(m)
        total = 0.0
        for start in range(0, m, cfg.batch_pixels):
            idx = order[start:start + cfg.batch_pixels]
            loss, dw, db = step_fn(head, f[idx], y[idx])
            total += float(loss) * len(idx)
            head.weight -= cfg.learning_rate * dw
            head.bias -= cfg.learning_rate * db
        losses.append(float(total / m))
        log.debug("epoch %d loss %.6f", epoch + 1, losses[-1])
    if not head.is_finite():
        raise FloatingPointError("training diverged to non-finite parameters")
    return losses


def train_prototype_head(
    corpus: Sequence[tuple[np.ndarray, np.ndarray]],
    prototypes: np.ndarray,
    cfg: TrainConfig | None = None,
) -> tuple[ProjectionHead, TrainReport]:
    """Fit a projection head so labelled pixels align with their class prototypes.

    ``corpus`` is a sequence of ``(features, labels)`` pairs; OOD-marked pixels
    are skipped. Returns the trained head and a per-epoch loss report.
    """
    cfg = cfg or TrainConfig()
    f, y = _stack_corpus(corpus)
    _check_labels(y, prototypes.shape[1])
    rng = SplitMix64(cfg.seed)
    head = _init_head(rng, f.shape[1], prototypes.shape[0], cfg)
    targets = prototypes.T

    def step(h, fb, yb):
        cos, g = _cosine_terms(project(h, fb), targets[yb])
        g /= len(yb)
        return -cos.mean(), fb.T @ g, g.sum(axis=0)

    losses = _sgd(f, y, head, rng, cfg, step)
    acc = float(np.mean(classify(score(project(head, f), prototypes)) == y))
    return head, TrainReport(losses, acc)


def train_baseline_head(
    corpus: Sequence[tuple[np.ndarray, np.ndarray]],
    num_classes: int,
    cfg: TrainConfig | None = None,
) -> tuple[ProjectionHead, TrainReport]:
    """Fit a plain linear classifier (D -> N logits) by softmax cross-entropy.

    Its logits play the role of scores, so the same uncertainty mapping applies.
    """
    cfg = cfg or TrainConfig()
    f, y = _stack_corpus(corpus)
    _check_labels(y, num_classes)
    rng = SplitMix64(cfg.seed)
    head = _init_head(rng, f.shape[1], num_classes, cfg)

    def step(h, fb, yb):
        logp = _log_softmax(project(h, fb))
        rows = np.arange(len(yb))
        g = np.exp(logp)
        g[rows, yb] -= 1.0
        g /= len(yb)
        return -logp[rows, yb].mean(), fb.T @ g, g.sum(axis=0)

    losses = _sgd(f, y, head, rng, cfg, step)
    acc = float(np.mean(classify(project(head, f)) == y))
    return head, TrainReport(losses, acc)
