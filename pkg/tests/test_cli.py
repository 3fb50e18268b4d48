import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from simplexseg import build_prototypes, validate_prototypes
from simplexseg.cli import main
from simplexseg.io import format_layout, read_pgm, read_tensor, write_tensor
from simplexseg.synthetic import grid_layout

SYNTH = "num_classes=6\ndepth=32\nheight=64\nwidth=64\nclass_separation=4.0\nnoise_sigma=1.0\nood_shift=8.0\n"
TRAIN_LAYOUT = format_layout(grid_layout(64, 64, [[0, 1, 2], [3, 4, 5]]))
OOD_LAYOUT = "0 0 64 64 ood\n"


def run(*argv):
    return main([str(a) for a in argv])


def test_prototypes_command(tmp_path):
    out = tmp_path / "p.t"
    assert run("prototypes", "--classes", 6, "--out", out) == 0
    p = read_tensor(out)
    assert p.shape == (5, 6)
    # stored as binary32, so re-validate at float32 resolution
    np.testing.assert_allclose(p.T @ p, np.where(np.eye(6, dtype=bool), 1.0, -0.2), atol=1e-6)
    assert validate_prototypes(build_prototypes(6)) == []


def _pipeline(d: Path, train_scenes=32, seed=0):
    d.mkdir(exist_ok=True)
    (d / "synth.cfg").write_text(SYNTH)
    (d / "train.layout").write_text(TRAIN_LAYOUT)
    (d / "ood.layout").write_text(OOD_LAYOUT)
    for i in range(train_scenes):
        assert run("gen", "--config", d / "synth.cfg", "--layout", d / "train.layout",
                   "--out-prefix", d / f"train{i:03d}", "--seed", 1000 + i) == 0
    assert run("gen", "--config", d / "synth.cfg", "--layout", d / "train.layout",
               "--out-prefix", d / "test_id", "--seed", 5000) == 0
    assert run("gen", "--config", d / "synth.cfg", "--layout", d / "ood.layout",
               "--out-prefix", d / "test_ood", "--seed", 5001) == 0
    assert run("train", "--features", d / "train*.features.t", "--labels", d / "train*.labels.t",
               "--classes", 6, "--out", d / "head.t", "--seed", seed) == 0
    for name in ("test_id", "test_ood"):
        assert run("infer", "--head", d / "head.t", "--classes", 6, "--features", d / f"{name}.features.t",
                   "--out-prefix", d / f"{name}.pred") == 0
    assert run("eval", "--pos", d / "test_ood.pred.uncertainty.t", "--neg", d / "test_id.pred.uncertainty.t",
               "--roc-out", d / "roc.csv", "--plot", d / "roc.png") == 0


def test_end_to_end_default_recipe(tmp_path, capsys):
    _pipeline(tmp_path)
    out = capsys.readouterr().out
    auc = float(out.strip().splitlines()[-1].removeprefix("auc="))
    assert (tmp_path / "roc.csv").read_text().endswith(f"# auc={auc!r}\n")
    assert (tmp_path / "head.t.loss.csv").read_text().startswith("epoch,loss\n1,")
    assert auc >= 0.9


def test_repeated_runs_are_byte_identical(tmp_path):
    _pipeline(tmp_path / "a", train_scenes=3)
    _pipeline(tmp_path / "b", train_scenes=3)
    files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files_a == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert "roc.png" in files_a and "test_ood.pred.pgm" in files_a
    for name in files_a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_infer_on_prototypes_gives_black_heatmap(tmp_path):
    # identity head with a big gain: each pixel's feature is a scaled prototype
    p = build_prototypes(6)
    head = np.vstack([60.0 * np.eye(5), np.zeros((1, 5))])
    labels = np.arange(64) % 6
    features = p.T[labels].reshape(8, 8, 5)
    write_tensor(head, tmp_path / "head.t")
    write_tensor(features, tmp_path / "f.t")
    assert run("infer", "--head", tmp_path / "head.t", "--classes", 6, "--features", tmp_path / "f.t",
               "--out-prefix", tmp_path / "o") == 0
    assert not read_pgm(tmp_path / "o.pgm").any()
    np.testing.assert_array_equal(read_tensor(tmp_path / "o.labels.t").ravel(), labels)
    assert read_tensor(tmp_path / "o.scores.t").shape == (8, 8, 6)


def test_baseline_head_through_infer(tmp_path):
    d = tmp_path
    (d / "s.cfg").write_text("num_classes=3\ndepth=5\nheight=8\nwidth=8\n")
    (d / "l.txt").write_text("0 0 4 8 0\n4 0 6 8 1\n6 0 8 8 2\n")
    assert run("gen", "--config", d / "s.cfg", "--layout", d / "l.txt", "--out-prefix", d / "s") == 0
    (d / "t.cfg").write_text("epochs=5\nbatch_pixels=16\n")
    assert run("train", "--features", d / "s.features.t", "--labels", d / "s.labels.t", "--classes", 3,
               "--baseline", "--config", d / "t.cfg", "--out", d / "b.t", "--report", d / "b.csv") == 0
    assert read_tensor(d / "b.t").shape == (6, 3)
    assert len((d / "b.csv").read_text().splitlines()) == 6
    assert run("infer", "--head", d / "b.t", "--classes", 3, "--features", d / "s.features.t",
               "--out-prefix", d / "o") == 0
    u = read_tensor(d / "o.uncertainty.t")
    assert u.shape == (8, 8) and (u >= 0).all() and (u <= 2 / 3 + 1e-6).all()


def test_corrupt_tensor_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.t"
    bad.write_bytes(b"SIMPLXT1" + b"\x02\0\0\0" + b"\x02\0\0\0\x02\0\0\0" + b"\0" * 12)
    write_tensor(np.zeros(3), tmp_path / "neg.t")
    assert run("eval", "--pos", bad, "--neg", tmp_path / "neg.t", "--roc-out", tmp_path / "r.csv") == 1
    err = capsys.readouterr().err
    assert "bad.t" in err and "length" in err
    assert not (tmp_path / "r.csv").exists()


def test_missing_file_exit_1(tmp_path, capsys):
    assert run("infer", "--head", tmp_path / "nope.t", "--classes", 3, "--features", tmp_path / "f.t",
               "--out-prefix", tmp_path / "o") == 1
    assert "nope.t" in capsys.readouterr().err


def test_head_class_mismatch_exit_1(tmp_path):
    write_tensor(np.zeros((4, 3)), tmp_path / "h.t")
    write_tensor(np.zeros((2, 2, 3)), tmp_path / "f.t")
    assert run("infer", "--head", tmp_path / "h.t", "--classes", 7, "--features", tmp_path / "f.t",
               "--out-prefix", tmp_path / "o") == 1


def test_empty_glob_is_usage_error(tmp_path, capsys):
    assert run("eval", "--pos", tmp_path / "none*.t", "--neg", tmp_path / "x*.t", "--roc-out", tmp_path / "r") == 2
    assert len(capsys.readouterr().err.strip().splitlines()) == 1


@pytest.mark.parametrize(
    "argv",
    [[], ["bogus"], ["prototypes", "--classes", "1", "--out", "x"], ["prototypes", "--out", "x"],
     ["gen", "--config", "c", "--layout", "l", "--out-prefix", "p", "--seed", "-4"]],
)
def test_usage_errors_exit_2(argv):
    proc = subprocess.run([sys.executable, "-m", "simplexseg.cli", *argv], capture_output=True, text=True)
    assert proc.returncode == 2
    assert len(proc.stderr.strip().splitlines()) == 1


def test_experiment_command(tmp_path, capsys):
    (tmp_path / "t.cfg").write_text("epochs=3\n")
    assert run("experiment", "--out-dir", tmp_path / "x", "--train-config", tmp_path / "t.cfg",
               "--train-scenes", 2, "--test-scenes", 1) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "method,auc,train_accuracy,final_loss,mean_id,mean_ood"
    assert [line.split(",")[0] for line in out[1:]] == ["prototype", "baseline"]
    for name in ("roc.png", "losses.png", "uncertainty.png", "roc_prototype.csv", "heatmap_baseline.pgm"):
        assert (tmp_path / "x" / name).stat().st_size > 0
