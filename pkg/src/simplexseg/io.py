"""On-disk formats: tensor files, PGM heatmaps, key=value configs and region layouts.

Tensor file layout (all little-endian)::

    8 bytes   ASCII "SIMPLXT1"
    u32       rank (1..4)
    u32 * rank  dims
    f32 * prod(dims)  payload, row-major (last dim fastest)

Every writer goes through :func:`atomic_write`, so a reader never sees a
partially written file.
"""

from __future__ import annotations

import dataclasses
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from simplexseg.head import OOD_LABEL, ProjectionHead
from simplexseg.synthetic import Region

MAGIC = b"SIMPLXT1"
MAX_RANK = 4


class TensorFormatError(ValueError):
    """A tensor file violates the format; ``invariant`` is one of magic/rank/dims/length."""

    def __init__(self, path, invariant: str, detail: str):
        self.path = str(path)
        self.invariant = invariant
        super().__init__(f"{path}: corrupt tensor file ({invariant}): {detail}")


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def tensor_bytes(array) -> bytes:
    a = np.asarray(array)
    if not 1 <= a.ndim <= MAX_RANK:
        raise ValueError(f"tensor rank must be 1..{MAX_RANK}, got {a.ndim}")
    header = MAGIC + np.array([a.ndim, *a.shape], dtype="<u4").tobytes()
    return header + np.ascontiguousarray(a, dtype="<f4").tobytes()


def write_tensor(array, path) -> None:
    atomic_write(path, tensor_bytes(array))


def parse_tensor(data: bytes, path="<bytes>") -> np.ndarray:
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise TensorFormatError(path, "magic", f"expected {MAGIC!r}")
    off = len(MAGIC)
    if len(data) < off + 4:
        raise TensorFormatError(path, "rank", "file ends before the rank field")
    rank = int(np.frombuffer(data, "<u4", 1, off)[0])
    if not 1 <= rank <= MAX_RANK:
        raise TensorFormatError(path, "rank", f"rank {rank} outside 1..{MAX_RANK}")
    off += 4
    if len(data) < off + 4 * rank:
        raise TensorFormatError(path, "dims", f"file ends before {rank} dims")
    dims = tuple(int(d) for d in np.frombuffer(data, "<u4", rank, off))
    off += 4 * rank
    expected = 4 * int(np.prod(dims, dtype=np.int64))
    if len(data) - off != expected:
        raise TensorFormatError(path, "length", f"payload is {len(data) - off} bytes, dims {list(dims)} need {expected}")
    return np.frombuffer(data, "<f4", offset=off).reshape(dims).copy()


def read_tensor(path) -> np.ndarray:
    """Load a tensor file as a float32 array."""
    return parse_tensor(Path(path).read_bytes(), path)


# heads are stored as one (D + 1, K) tensor: weight rows then the bias row
def head_to_array(head: ProjectionHead) -> np.ndarray:
    return np.vstack([head.weight, head.bias[None, :]])


def head_from_array(array: np.ndarray, path="<array>") -> ProjectionHead:
    a = np.asarray(array, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 2:
        raise TensorFormatError(path, "dims", f"head tensor must be (D + 1, K), got {list(a.shape)}")
    return ProjectionHead(a[:-1], a[-1])


def labels_to_array(labels: np.ndarray) -> np.ndarray:
    return np.asarray(labels, dtype=np.float32)


def labels_from_array(array: np.ndarray) -> np.ndarray:
    out = np.rint(np.asarray(array)).astype(np.int64)
    out[out < 0] = OOD_LABEL
    return out


def heatmap_bytes(u, num_classes: int) -> bytes:
    """Binary PGM with ``round(255 * u / (1 - 1/N))``: black = certain, white = maximally uncertain."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError("heatmap needs a 2-D uncertainty map")
    scaled = np.floor(255.0 * u / (1.0 - 1.0 / num_classes) + 0.5)
    pixels = np.clip(scaled, 0, 255).astype(np.uint8)
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes()


def write_heatmap(u, num_classes: int, path) -> None:
    atomic_write(path, heatmap_bytes(u, num_classes))


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5" or int(fields[3]) != 255:
        raise ValueError(f"{path}: not an 8-bit binary PGM")
    w, h = int(fields[1]), int(fields[2])
    return np.frombuffer(data, np.uint8, w * h, pos + 1).reshape(h, w)


def parse_kv(text: str, source="<config>") -> dict[str, str]:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{n}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def config_from_kv(cls, values: dict[str, str], source="<config>", **overrides):
    """Build dataclass ``cls`` from string values, converting by field type."""
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in values.items():
        if key not in fields:
            raise ValueError(f"{source}: unknown key {key!r} (known: {', '.join(fields)})")
        kind = str(fields[key].type)
        try:
            kwargs[key] = int(value, 0) if kind == "int" else float(value)
        except ValueError:
            raise ValueError(f"{source}: bad value for {key}: {value!r}") from None
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**kwargs)


def load_config(cls, path, **overrides):
    path = Path(path)
    return config_from_kv(cls, parse_kv(path.read_text(), path), path, **overrides)


def parse_layout(text: str, source="<layout>") -> list[Region]:
    """Lines of ``x0 y0 x1 y1 label`` (half-open rectangles; label is a class index or ``ood``)."""
    regions = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"{source}:{n}: expected 'x0 y0 x1 y1 label', got {raw!r}")
        try:
            x0, y0, x1, y1 = (int(p) for p in parts[:4])
            label = OOD_LABEL if parts[4].lower() == "ood" else int(parts[4])
        except ValueError:
            raise ValueError(f"{source}:{n}: bad region {raw!r}") from None
        if label < 0 and label != OOD_LABEL:
            raise ValueError(f"{source}:{n}: negative class index {label}")
        regions.append(Region(x0, y0, x1, y1, label))
    return regions


def format_layout(regions: Sequence[Region]) -> str:
    rows = []
    for r in regions:
        label = "ood" if r.label == OOD_LABEL else str(r.label)
        rows.append(f"{r.x0} {r.y0} {r.x1} {r.y1} {label}")
    return "\n".join(rows) + "\n"
