"""Simplex-prototype uncertainty heads for semantic segmentation feature maps."""

from simplexseg.prototypes import build_prototypes, validate_prototypes
from simplexseg.head import (
    OOD_LABEL,
    ProjectionHead,
    classify,
    project,
    score,
    uncertainty,
)
from simplexseg.training import (
    TrainConfig,
    TrainReport,
    cosine_loss,
    cosine_loss_gradient,
    cross_entropy_gradient,
    cross_entropy_loss,
    train_baseline_head,
    train_prototype_head,
)
from simplexseg.synthetic import LabeledScene, Region, SynthConfig, generate_scene, make_class_means
from simplexseg.evaluation import RocCurve, per_segment_auc, roc_curve, summarize

__version__ = "0.1.0"

__all__ = [
    "OOD_LABEL",
    "LabeledScene",
    "ProjectionHead",
    "Region",
    "RocCurve",
    "SynthConfig",
    "TrainConfig",
    "TrainReport",
    "build_prototypes",
    "classify",
    "cosine_loss",
    "cosine_loss_gradient",
    "cross_entropy_gradient",
    "cross_entropy_loss",
    "generate_scene",
    "make_class_means",
    "per_segment_auc",
    "project",
    "roc_curve",
    "score",
    "summarize",
    "train_baseline_head",
    "train_prototype_head",
    "uncertainty",
    "validate_prototypes",
]
