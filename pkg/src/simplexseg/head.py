"""Inference path of the uncertainty head: project, score, map to uncertainty.

Feature maps are ``(H, W, D)`` float arrays (channels last). All functions
also accept any leading shape, e.g. a flat ``(M, D)`` batch of pixels.
Label maps are integer arrays with :data:`OOD_LABEL` marking out-of-distribution
or ignored pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OOD_LABEL = -1


@dataclass
class ProjectionHead:
    """Affine per-pixel map ``z = weight.T @ f + bias`` (a 1x1 convolution)."""

    weight: np.ndarray  # (D, K)
    bias: np.ndarray  # (K,)

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ValueError(
                f"weight must be (D, K) and bias (K,), got {self.weight.shape} and {self.bias.shape}"
            )

    @classmethod
    def zeros(cls, in_dim: int, out_dim: int) -> "ProjectionHead":
        return cls(np.zeros((in_dim, out_dim)), np.zeros(out_dim))

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def num_params(self) -> int:
        return self.weight.size + self.bias.size

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.weight).all() and np.isfinite(self.bias).all())

    def copy(self) -> "ProjectionHead":
        return type(self)(self.weight.copy(), self.bias.copy())


def project(head: ProjectionHead, features: np.ndarray) -> np.ndarray:
    """Apply the head to every pixel; output has the feature shape with D replaced by K."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[-1] != head.in_dim:
        raise ValueError(f"feature depth {features.shape[-1]} does not match head input {head.in_dim}")
    return features @ head.weight + head.bias


def score(projected: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """Dot product of each projected pixel with every prototype column."""
    projected = np.asarray(projected, dtype=np.float64)
    if projected.shape[-1] != prototypes.shape[0]:
        raise ValueError(
            f"projection dimension {projected.shape[-1]} does not match prototype dimension {prototypes.shape[0]}"
        )
    return projected @ prototypes


def uncertainty(scores: np.ndarray) -> np.ndarray:
    """``1 - max softmax probability`` per pixel, in ``[0, 1 - 1/N]``.

    This is the same mapping for prototype scores and for plain classifier
    logits, so both heads are compared on one scale. Values are uncalibrated.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    # max softmax = 1 / sum(exp(s - max s)); the max entry contributes exactly 1
    shifted = scores - scores.max(axis=-1, keepdims=True)
    return 1.0 - 1.0 / np.exp(shifted).sum(axis=-1)


def classify(scores: np.ndarray) -> np.ndarray:
    """Argmax over classes; ``np.argmax`` already breaks ties toward the lowest index."""
    return np.argmax(np.asarray(scores), axis=-1)
