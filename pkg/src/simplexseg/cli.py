"""Command-line pipeline: prototypes, gen, train, infer, eval, experiment.

Exit status is 0 on success, 1 when an input file is missing or corrupt,
and 2 on usage errors. Every output file is written atomically.
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import logging
import sys
from pathlib import Path

import numpy as np

from simplexseg import io
from simplexseg.evaluation import roc_curve, summary_csv
from simplexseg.head import classify, project, score, uncertainty
from simplexseg.prototypes import build_prototypes
from simplexseg.synthetic import SynthConfig, generate_scene
from simplexseg.training import TrainConfig, train_baseline_head, train_prototype_head

log = logging.getLogger("simplexseg")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def _expand(pattern: str, flag: str) -> list[str]:
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise UsageError(f"{flag} {pattern!r} matched no files")
    return paths


def _read(path) -> np.ndarray:
    try:
        return io.read_tensor(path)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None


def _config(cls, path, seed):
    if path is None:
        return cls() if seed is None else cls(seed=seed)
    try:
        return io.load_config(cls, path, seed=seed)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None


def cmd_prototypes(args) -> None:
    io.write_tensor(build_prototypes(args.classes), args.out)


def cmd_gen(args) -> None:
    cfg = _config(SynthConfig, args.config, args.seed)
    try:
        layout = io.parse_layout(Path(args.layout).read_text(), args.layout)
        scene = generate_scene(cfg, layout)
    except FileNotFoundError:
        raise InputError(f"{args.layout}: no such file") from None
    except ValueError as exc:
        raise InputError(f"{args.layout}: {exc}") from None
    io.write_tensor(scene.features, f"{args.out_prefix}.features.t")
    io.write_tensor(io.labels_to_array(scene.labels), f"{args.out_prefix}.labels.t")


def cmd_train(args) -> None:
    cfg = _config(TrainConfig, args.config, args.seed)
    feats = _expand(args.features, "--features")
    labs = _expand(args.labels, "--labels")
    if len(feats) != len(labs):
        raise UsageError(f"--features matched {len(feats)} files but --labels matched {len(labs)}")
    corpus = []
    for fp, lp in zip(feats, labs):
        f, y = _read(fp), io.labels_from_array(_read(lp))
        if f.ndim != 3 or f.shape[:2] != y.shape:
            raise InputError(f"{fp}: feature grid {list(f.shape)} does not match labels {lp} {list(y.shape)}")
        corpus.append((f.astype(np.float64), y))
    try:
        if args.baseline:
            head, report = train_baseline_head(corpus, args.classes, cfg)
        else:
            head, report = train_prototype_head(corpus, build_prototypes(args.classes), cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    io.write_tensor(io.head_to_array(head), args.out)
    io.atomic_write(args.report or f"{args.out}.loss.csv", report.to_csv().encode())
    print(f"train_accuracy={report.final_train_accuracy!r}")


def cmd_infer(args) -> None:
    head = io.head_from_array(_read(args.head), args.head)
    features = _read(args.features)
    n = args.classes
    if features.ndim != 3 or features.shape[-1] != head.in_dim:
        raise InputError(f"{args.features}: dims {list(features.shape)} do not fit a head with input depth {head.in_dim}")
    projected = project(head, features)
    if head.out_dim == n - 1:
        scores = score(projected, build_prototypes(n))
    elif head.out_dim == n:
        scores = projected
    else:
        raise InputError(f"{args.head}: head output {head.out_dim} fits neither {n - 1} (prototype) nor {n} (baseline)")
    u = uncertainty(scores)
    p = args.out_prefix
    io.write_tensor(scores, f"{p}.scores.t")
    io.write_tensor(io.labels_to_array(classify(scores)), f"{p}.labels.t")
    io.write_tensor(u, f"{p}.uncertainty.t")
    io.write_heatmap(u, n, f"{p}.pgm")


def cmd_eval(args) -> None:
    pos = np.concatenate([_read(p).ravel() for p in _expand(args.pos, "--pos")])
    neg = np.concatenate([_read(p).ravel() for p in _expand(args.neg, "--neg")])
    roc = roc_curve(pos.astype(np.float64), neg.astype(np.float64))
    io.atomic_write(args.roc_out, roc.to_csv().encode())
    if args.plot:
        from simplexseg.plotting import plot_roc

        plot_roc({args.name: roc}, args.plot)
    print(f"auc={roc.auc!r}")


def cmd_experiment(args) -> None:
    from simplexseg.experiment import Recipe, run_experiment
    from simplexseg.plotting import plot_losses, plot_roc, plot_uncertainty_maps

    synth = _config(SynthConfig, args.synth_config, None)
    train = _config(TrainConfig, args.train_config, None)
    recipe = Recipe(synth=synth, train=train, train_scenes=args.train_scenes, test_scenes=args.test_scenes)
    if args.seed is not None:
        recipe = dataclasses.replace(recipe, seed=args.seed)
    result = run_experiment(recipe)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = synth.num_classes
    for name, r in result.methods.items():
        io.atomic_write(out / f"roc_{name}.csv", r.roc.to_csv().encode())
        io.atomic_write(out / f"loss_{name}.csv", r.report.to_csv().encode())
        io.atomic_write(out / f"summary_{name}.csv", summary_csv(r.summary).encode())
        io.write_heatmap(r.uncertainty_maps[0], n, out / f"heatmap_{name}.pgm")
    report = result.report_csv()
    io.atomic_write(out / "report.csv", report.encode())
    plot_roc({k: r.roc for k, r in result.methods.items()}, out / "roc.png")
    plot_losses({k: r.report.loss_per_epoch for k, r in result.methods.items()}, out / "losses.png")
    plot_uncertainty_maps(
        {k: r.uncertainty_maps[0] for k, r in result.methods.items()}, n, out / "uncertainty.png",
        labels=result.test_scenes[0].labels,
    )
    sys.stdout.write(report)


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def _classes(value: str) -> int:
    n = int(value)
    if n < 2:
        raise argparse.ArgumentTypeError("need at least 2 classes")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simplexseg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=_seed, help="override the seed from any config")
        return p

    p = add("prototypes", cmd_prototypes, "write the (N-1) x N prototype matrix")
    p.add_argument("--classes", type=_classes, required=True)
    p.add_argument("--out", required=True)

    p = add("gen", cmd_gen, "generate a synthetic labelled feature map")
    p.add_argument("--config", required=True, help="key=value synthetic-data config")
    p.add_argument("--layout", required=True, help="region file: 'x0 y0 x1 y1 label' per line")
    p.add_argument("--out-prefix", required=True)

    p = add("train", cmd_train, "train a prototype head (or --baseline classifier)")
    p.add_argument("--features", required=True, help="glob of feature tensors")
    p.add_argument("--labels", required=True, help="glob of label tensors, paired in sorted order")
    p.add_argument("--classes", type=_classes, required=True)
    p.add_argument("--baseline", action="store_true", help="train the plain cross-entropy classifier")
    p.add_argument("--config", help="key=value training config")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="loss CSV path (default: <out>.loss.csv)")

    p = add("infer", cmd_infer, "score a feature map and emit uncertainty tensors and heatmap")
    p.add_argument("--head", required=True)
    p.add_argument("--classes", type=_classes, required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out-prefix", required=True)

    p = add("eval", cmd_eval, "ROC/AUC of OOD (--pos) vs ID (--neg) uncertainty tensors")
    p.add_argument("--pos", required=True)
    p.add_argument("--neg", required=True)
    p.add_argument("--roc-out", required=True)
    p.add_argument("--plot", help="optional PNG of the ROC curve")
    p.add_argument("--name", default="uncertainty", help="legend label for --plot")

    p = add("experiment", cmd_experiment, "run the synthetic prototype-vs-baseline experiment")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--synth-config")
    p.add_argument("--train-config")
    p.add_argument("--train-scenes", type=int, default=32)
    p.add_argument("--test-scenes", type=int, default=4)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"simplexseg {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (InputError, io.TensorFormatError) as exc:
        print(f"simplexseg {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
