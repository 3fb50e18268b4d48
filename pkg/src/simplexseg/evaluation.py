"""ROC/AUC for separating out-of-distribution pixels by their uncertainty.

Positives are pixels that should be flagged uncertain (OOD), negatives are
in-distribution pixels. A pixel is predicted positive when its score is at
least the threshold; thresholds run over the distinct observed scores, so
tied scores move the curve diagonally and the trapezoidal area equals the
Mann-Whitney statistic exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from simplexseg.head import OOD_LABEL


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # thresholds[k] produced point k + 1; point 0 is (0, 0)
    auc: float

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.fpr, self.tpr])

    def to_csv(self) -> str:
        lines = ["fpr,tpr"]
        lines += [f"{x!r},{y!r}" for x, y in zip(self.fpr.tolist(), self.tpr.tolist())]
        lines.append(f"# auc={self.auc!r}")
        return "\n".join(lines) + "\n"


def _as_scores(values, name):
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} scores are empty")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} scores contain non-finite values")
    return arr


def roc_curve(positive_scores, negative_scores) -> RocCurve:
    pos = _as_scores(positive_scores, "positive")
    neg = _as_scores(negative_scores, "negative")
    scores = np.concatenate([pos, neg])
    is_pos = np.concatenate([np.ones(pos.size, dtype=np.int64), np.zeros(neg.size, dtype=np.int64)])
    order = np.argsort(-scores, kind="stable")
    scores, is_pos = scores[order], is_pos[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[scores[1:] != scores[:-1], True])
    tp = np.r_[0, np.cumsum(is_pos)[ends]]
    fp = np.r_[0, np.cumsum(1 - is_pos)[ends]]
    # integer trapezoid: sum dfp * (tp_k + tp_{k+1}) / 2, normalised once at the end
    twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    auc = twice_area / (2 * pos.size * neg.size)
    return RocCurve(fp / neg.size, tp / pos.size, scores[ends], auc)


def auc_score(positive_scores, negative_scores) -> float:
    return roc_curve(positive_scores, negative_scores).auc


def per_segment_auc(
    scenes: Iterable[tuple[np.ndarray, np.ndarray]],
    negative_scores,
) -> dict[int, float]:
    """AUC of each segment class of an OOD corpus against shared in-distribution negatives.

    ``scenes`` yields ``(uncertainty_map, label_map)`` pairs labelled in the OOD
    corpus's own vocabulary; marker pixels are ignored and absent classes omitted.
    The result is ordered from most to least separable.
    """
    neg = _as_scores(negative_scores, "negative")
    pooled: dict[int, list[np.ndarray]] = {}
    for u, labels in scenes:
        u = np.asarray(u, dtype=np.float64)
        labels = np.asarray(labels)
        if u.shape != labels.shape:
            raise ValueError(f"uncertainty shape {u.shape} and label shape {labels.shape} differ")
        for c in np.unique(labels):
            if c == OOD_LABEL:
                continue
            pooled.setdefault(int(c), []).append(u[labels == c])
    aucs = {c: auc_score(np.concatenate(parts), neg) for c, parts in pooled.items()}
    return dict(sorted(aucs.items(), key=lambda kv: (-kv[1], kv[0])))


@dataclass
class Stats:
    count: int
    mean: float
    min: float
    max: float

    @classmethod
    def of(cls, values: np.ndarray) -> "Stats":
        return cls(int(values.size), float(values.mean()), float(values.min()), float(values.max()))


def summarize(u, labels) -> dict[str, Stats]:
    """Mean/min/max uncertainty overall, per class (``class_<c>``), for ID and for OOD pixels."""
    u = np.asarray(u, dtype=np.float64)
    labels = np.asarray(labels)
    if u.shape != labels.shape:
        raise ValueError(f"uncertainty shape {u.shape} and label shape {labels.shape} differ")
    out = {"all": Stats.of(u)}
    ood = labels == OOD_LABEL
    if (~ood).any():
        out["id"] = Stats.of(u[~ood])
    for c in np.unique(labels[~ood]):
        out[f"class_{int(c)}"] = Stats.of(u[labels == c])
    if ood.any():
        out["ood"] = Stats.of(u[ood])
    return out


def summary_csv(summary: dict[str, Stats]) -> str:
    lines = ["group,count,mean,min,max"]
    lines += [f"{k},{s.count},{s.mean!r},{s.min!r},{s.max!r}" for k, s in summary.items()]
    return "\n".join(lines) + "\n"
