"""On-disk interchange format for per-layer activations and labels.

This is the boundary between any feature producer (the toy backbone, an
external exporter, a third-party tool) and the learners. The format is a
public, bit-exact contract:

Tensor file (one per layer)
    magic    4 bytes  b"CHEF"
    version  u32 LE   1
    rows     u32 LE   number of samples
    cols     u32 LE   feature dimension
    data     rows*cols IEEE-754 float32 LE, row-major

Labels file
    magic    4 bytes  b"CHFL"
    version  u32 LE   1
    count    u32 LE
    data     count u32 LE class indices

Manifest (UTF-8 JSON, paths relative to the manifest's directory)
    {"version": 1, "split_name": ..., "class_names": [...],
     "sample_count": n,
     "layers": [{"name": ..., "dim": ..., "path": ...}, ...],
     "labels_path": ...}

Storage is 32-bit; everything is widened to float64 on load. Every
corruption mode maps to a DataError, so a FeatureSet obtained from
read_feature_set always satisfies its invariants.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

TENSOR_MAGIC = b"CHEF"
LABELS_MAGIC = b"CHFL"
FORMAT_VERSION = 1

__all__ = [
    "FeatureSet",
    "LayerEntry",
    "Manifest",
    "write_feature_set",
    "read_feature_set",
    "read_manifest",
    "select_layers",
]


@dataclass
class FeatureSet:
    """Per-layer activation matrices plus labels for one split.

    layers maps layer id -> (n_samples x dim) float64 matrix; layer_ids
    fixes the order. All layer matrices share their row count with the
    labels vector, and labels index into class_names.
    """

    layer_ids: list[str]
    layers: dict[str, np.ndarray]
    labels: np.ndarray
    class_names: list[str]
    split_name: str = "default"

    @property
    def sample_count(self) -> int:
        return int(self.labels.shape[0])

    def layer_dim(self, layer_id: str) -> int:
        return int(self.layers[layer_id].shape[1])

    def validate(self) -> None:
        if not self.layer_ids:
            raise DataError("feature set has no layers")
        if len(set(self.layer_ids)) != len(self.layer_ids):
            raise DataError(f"duplicate layer ids in {self.layer_ids}")
        if set(self.layer_ids) != set(self.layers):
            raise DataError("layer_ids and layer matrices disagree")
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DataError("labels must be a 1-D vector")
        n = labels.shape[0]
        for lid in self.layer_ids:
            m = self.layers[lid]
            if m.ndim != 2:
                raise DataError(f"layer {lid!r} is not a matrix")
            if m.shape[0] != n:
                raise DataError(
                    f"layer {lid!r} has {m.shape[0]} rows, labels have {n}"
                )
            if not np.all(np.isfinite(m)):
                raise DataError(f"layer {lid!r} contains non-finite values")
        if n > 0 and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise DataError(
                f"labels must lie in [0, {len(self.class_names)}), "
                f"found range [{labels.min()}, {labels.max()}]"
            )


@dataclass(frozen=True)
class LayerEntry:
    name: str
    dim: int
    path: str


@dataclass(frozen=True)
class Manifest:
    version: int
    split_name: str
    class_names: list[str]
    sample_count: int
    layers: list[LayerEntry]
    labels_path: str
    directory: Path = field(compare=False, default=Path("."))

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "split_name": self.split_name,
            "class_names": list(self.class_names),
            "sample_count": self.sample_count,
            "layers": [
                {"name": e.name, "dim": e.dim, "path": e.path} for e in self.layers
            ],
            "labels_path": self.labels_path,
        }
        return json.dumps(doc, indent=2) + "\n"


def _sanitize(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name)


def _write_tensor(path: Path, matrix: np.ndarray) -> None:
    rows, cols = matrix.shape
    data = np.ascontiguousarray(matrix, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, rows, cols))
        fh.write(data.tobytes())


def _write_labels(path: Path, labels: np.ndarray) -> None:
    data = np.ascontiguousarray(labels, dtype="<u4")
    with open(path, "wb") as fh:
        fh.write(LABELS_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, labels.shape[0]))
        fh.write(data.tobytes())


def write_feature_set(fs: FeatureSet, directory) -> Manifest:
    """Write a validated FeatureSet; returns the manifest that was stored.

    Round-trips losslessly at 32-bit precision: values are rounded to
    float32 on disk and widened back to float64 on load.
    """
    fs.validate()
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    entries = []
    for i, lid in enumerate(fs.layer_ids):
        fname = f"layer{i:02d}_{_sanitize(lid)}.feat"
        _write_tensor(directory / fname, fs.layers[lid])
        entries.append(LayerEntry(name=lid, dim=fs.layer_dim(lid), path=fname))
    labels_fname = "labels.lab"
    _write_labels(directory / labels_fname, fs.labels)

    manifest = Manifest(
        version=FORMAT_VERSION,
        split_name=fs.split_name,
        class_names=list(fs.class_names),
        sample_count=fs.sample_count,
        layers=entries,
        labels_path=labels_fname,
        directory=directory,
    )
    (directory / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest


def _read_exact(fh, n: int, path: Path, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise DataError(f"{path}: truncated {what} (wanted {n} bytes, got {len(buf)})")
    return buf


def _read_tensor(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, path, "magic")
        if magic != TENSOR_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, expected {TENSOR_MAGIC!r}")
        version, rows, cols = struct.unpack("<III", _read_exact(fh, 12, path, "header"))
        if version != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported version {version}")
        nbytes = rows * cols * 4
        payload = fh.read(nbytes + 1)
        if len(payload) < nbytes:
            raise DataError(
                f"{path}: truncated payload (expected {nbytes} bytes for "
                f"{rows}x{cols} float32, got {len(payload)})"
            )
        if len(payload) > nbytes:
            raise DataError(f"{path}: trailing bytes after {rows}x{cols} payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    return data.astype(np.float64)


def _read_labels(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, path, "magic")
        if magic != LABELS_MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}, expected {LABELS_MAGIC!r}")
        version, count = struct.unpack("<II", _read_exact(fh, 8, path, "header"))
        if version != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported version {version}")
        nbytes = count * 4
        payload = fh.read(nbytes + 1)
        if len(payload) < nbytes:
            raise DataError(
                f"{path}: truncated payload (expected {nbytes} bytes for "
                f"{count} labels, got {len(payload)})"
            )
        if len(payload) > nbytes:
            raise DataError(f"{path}: trailing bytes after {count} labels")
    return np.frombuffer(payload, dtype="<u4").astype(np.int64)


def read_manifest(manifest_path) -> Manifest:
    path = Path(manifest_path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    try:
        if doc["version"] != FORMAT_VERSION:
            raise DataError(f"{path}: unsupported manifest version {doc['version']}")
        layers = [
            LayerEntry(name=e["name"], dim=int(e["dim"]), path=e["path"])
            for e in doc["layers"]
        ]
        manifest = Manifest(
            version=int(doc["version"]),
            split_name=doc["split_name"],
            class_names=list(doc["class_names"]),
            sample_count=int(doc["sample_count"]),
            layers=layers,
            labels_path=doc["labels_path"],
            directory=path.parent,
        )
    except KeyError as exc:
        raise DataError(f"{path}: missing manifest field {exc}") from exc
    return manifest


def read_feature_set(manifest_path) -> FeatureSet:
    """Load and fully validate a stored FeatureSet."""
    manifest = read_manifest(manifest_path)
    base = manifest.directory

    layers: dict[str, np.ndarray] = {}
    layer_ids: list[str] = []
    for entry in manifest.layers:
        fpath = base / entry.path
        if not fpath.exists():
            raise DataError(f"layer file missing: {fpath}")
        m = _read_tensor(fpath)
        if m.shape[0] != manifest.sample_count:
            raise DataError(
                f"{fpath}: header rows {m.shape[0]} != manifest "
                f"sample_count {manifest.sample_count}"
            )
        if m.shape[1] != entry.dim:
            raise DataError(
                f"{fpath}: header cols {m.shape[1]} != manifest dim {entry.dim}"
            )
        layer_ids.append(entry.name)
        layers[entry.name] = m

    lpath = base / manifest.labels_path
    if not lpath.exists():
        raise DataError(f"labels file missing: {lpath}")
    labels = _read_labels(lpath)
    if labels.shape[0] != manifest.sample_count:
        raise DataError(
            f"{lpath}: {labels.shape[0]} labels != manifest "
            f"sample_count {manifest.sample_count}"
        )

    fs = FeatureSet(
        layer_ids=layer_ids,
        layers=layers,
        labels=labels,
        class_names=manifest.class_names,
        split_name=manifest.split_name,
    )
    fs.validate()
    return fs


def select_layers(fs: FeatureSet, layer_ids: list[str]) -> FeatureSet:
    """Restrict a FeatureSet to the requested layers, in the given order."""
    unknown = [lid for lid in layer_ids if lid not in fs.layers]
    if unknown:
        raise ConfigError(
            f"unknown layer id(s) {unknown}; available: {fs.layer_ids}"
        )
    if len(set(layer_ids)) != len(layer_ids):
        raise ConfigError(f"duplicate layer ids in selection {layer_ids}")
    return FeatureSet(
        layer_ids=list(layer_ids),
        layers={lid: fs.layers[lid] for lid in layer_ids},
        labels=fs.labels,
        class_names=fs.class_names,
        split_name=fs.split_name,
    )
