"""Desk-scale in-distribution vs out-of-distribution experiment.

Trains the prototype head and the baseline classifier on the same synthetic
corpus, scores held-out scenes that mix class regions with an OOD region,
and pools pixels (ID = negatives, OOD = positives) for ROC/AUC.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from simplexseg.evaluation import RocCurve, Stats, roc_curve, summarize
from simplexseg.head import OOD_LABEL, ProjectionHead, project, score, uncertainty
from simplexseg.prototypes import build_prototypes
from simplexseg.rng import splitmix64
from simplexseg.synthetic import LabeledScene, Region, SynthConfig, generate_scene, grid_layout
from simplexseg.training import TrainConfig, TrainReport, train_baseline_head, train_prototype_head

log = logging.getLogger(__name__)

METHODS = ("prototype", "baseline")


def default_train_layout(height: int = 64, width: int = 64) -> list[Region]:
    return grid_layout(height, width, [[0, 1, 2], [3, 4, 5]])


def default_test_layout(height: int = 64, width: int = 64) -> list[Region]:
    """Top half holds all six classes, bottom half is one OOD block."""
    return grid_layout(height, width, [[0, 1, 2], [3, 4, 5], [OOD_LABEL]])


@dataclass
class Recipe:
    synth: SynthConfig = field(default_factory=SynthConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    train_scenes: int = 32
    test_scenes: int = 4
    seed: int = 2024
    train_layout: list[Region] | None = None
    test_layout: list[Region] | None = None

    def layouts(self):
        h, w = self.synth.height, self.synth.width
        return (self.train_layout or default_train_layout(h, w), self.test_layout or default_test_layout(h, w))

    def scene_seeds(self) -> tuple[list[int], list[int]]:
        seeds = [int(s) for s in splitmix64(self.seed, 0, self.train_scenes + self.test_scenes)]
        return seeds[: self.train_scenes], seeds[self.train_scenes:]


@dataclass
class MethodResult:
    head: ProjectionHead
    report: TrainReport
    roc: RocCurve
    summary: dict[str, Stats]
    uncertainty_maps: list[np.ndarray]


@dataclass
class ExperimentResult:
    recipe: Recipe
    test_scenes: list[LabeledScene]
    methods: dict[str, MethodResult]

    def report_csv(self) -> str:
        lines = ["method,auc,train_accuracy,final_loss,mean_id,mean_ood"]
        for name, r in self.methods.items():
            lines.append(
                f"{name},{r.roc.auc!r},{r.report.final_train_accuracy!r},{r.report.loss_per_epoch[-1]!r},"
                f"{r.summary['id'].mean!r},{r.summary['ood'].mean!r}"
            )
        return "\n".join(lines) + "\n"


def method_scores(name: str, head: ProjectionHead, features: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    if name == "prototype":
        return score(project(head, features), prototypes)
    return project(head, features)


def _evaluate(name, head, report, scenes, prototypes) -> MethodResult:
    maps = [uncertainty(method_scores(name, head, s.features, prototypes)) for s in scenes]
    u = np.stack(maps)
    labels = np.stack([s.labels for s in scenes])
    ood = labels == OOD_LABEL
    return MethodResult(head, report, roc_curve(u[ood], u[~ood]), summarize(u, labels), maps)


def run_experiment(recipe: Recipe | None = None) -> ExperimentResult:
    recipe = recipe or Recipe()
    train_layout, test_layout = recipe.layouts()
    train_seeds, test_seeds = recipe.scene_seeds()
    cfg = recipe.synth
    corpus = [generate_scene(dataclasses.replace(cfg, seed=s), train_layout) for s in train_seeds]
    tests = [generate_scene(dataclasses.replace(cfg, seed=s), test_layout) for s in test_seeds]
    pairs = [(s.features, s.labels) for s in corpus]
    prototypes = build_prototypes(cfg.num_classes)

    results = {}
    head, report = train_prototype_head(pairs, prototypes, recipe.train)
    results["prototype"] = _evaluate("prototype", head, report, tests, prototypes)
    head, report = train_baseline_head(pairs, cfg.num_classes, recipe.train)
    results["baseline"] = _evaluate("baseline", head, report, tests, prototypes)
    for name, r in results.items():
        log.info("%s: auc=%.4f train_acc=%.4f", name, r.roc.auc, r.report.final_train_accuracy)
    return ExperimentResult(recipe, tests, results)
