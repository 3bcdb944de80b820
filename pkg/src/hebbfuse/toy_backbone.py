"""Self-contained multi-layer feature generator for desk-scale experiments.

Synthetic classification data comes from Gaussian class clusters, with
three controllable distribution shifts relative to the unshifted source:

* prior shift     -- class frequencies change, clusters stay put
* covariate shift -- an affine map (rotation in the first two input
                     dimensions, isotropic scale, constant translation)
                     is applied to the inputs only
* concept shift   -- a fraction of labels is reassigned to other classes

A small fully-connected rectifier network trained on the source data
plays the role of a pretrained backbone; its per-layer activations are
exported through the feature store so the learners never see raw inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError
from .feature_store import FeatureSet, Manifest, write_feature_set

__all__ = [
    "PriorShift",
    "CovariateShift",
    "ConceptShift",
    "SyntheticSpec",
    "MlpBackbone",
    "gen_synthetic",
    "class_means",
    "train_backbone",
    "evaluate_backbone",
    "forward_activations",
    "export_features",
    "generate_domain_suite",
]


@dataclass(frozen=True)
class PriorShift:
    class_weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.class_weights)
        object.__setattr__(self, "class_weights", w)
        if any(x < 0 for x in w):
            raise ConfigError("class weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ConfigError(f"class weights must sum to 1, got {sum(w)}")


@dataclass(frozen=True)
class CovariateShift:
    """x -> scale * R(rotation_deg) x + translation, labels untouched.

    The rotation acts on input dimensions 0 and 1; translation is a
    constant added to every coordinate.
    """

    rotation_deg: float = 0.0
    translation: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ConfigError(f"scale must be > 0, got {self.scale}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = x.copy()
        theta = np.deg2rad(self.rotation_deg)
        c, s = np.cos(theta), np.sin(theta)
        x0, x1 = out[:, 0].copy(), out[:, 1].copy()
        out[:, 0] = c * x0 - s * x1
        out[:, 1] = s * x0 + c * x1
        return self.scale * out + self.translation

    def invert(self, x: np.ndarray) -> np.ndarray:
        out = (x - self.translation) / self.scale
        theta = np.deg2rad(self.rotation_deg)
        c, s = np.cos(theta), np.sin(theta)
        x0, x1 = out[:, 0].copy(), out[:, 1].copy()
        out[:, 0] = c * x0 + s * x1
        out[:, 1] = -s * x0 + c * x1
        return out


@dataclass(frozen=True)
class ConceptShift:
    label_flip_fraction: float

    def __post_init__(self):
        if not 0.0 <= self.label_flip_fraction < 0.5:
            raise ConfigError(
                f"flip fraction must be in [0, 0.5), got {self.label_flip_fraction}"
            )


Shift = PriorShift | CovariateShift | ConceptShift


@dataclass(frozen=True)
class SyntheticSpec:
    classes: int = 10
    input_dim: int = 16
    samples_per_class: int = 100
    cluster_spread: float = 0.15
    shift: Shift | None = None
    seed: int = 0

    def __post_init__(self):
        if self.classes < 2:
            raise ConfigError(f"need >= 2 classes, got {self.classes}")
        if self.input_dim < 2:
            raise ConfigError(f"need input_dim >= 2, got {self.input_dim}")
        if self.samples_per_class < 1:
            raise ConfigError("samples_per_class must be >= 1")
        if self.cluster_spread <= 0:
            raise ConfigError("cluster_spread must be > 0")
        if isinstance(self.shift, PriorShift):
            if len(self.shift.class_weights) != self.classes:
                raise ConfigError(
                    f"prior shift has {len(self.shift.class_weights)} weights "
                    f"for {self.classes} classes"
                )

    @property
    def total_samples(self) -> int:
        return self.classes * self.samples_per_class


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**128 - 1)))


def class_means(spec: SyntheticSpec) -> np.ndarray:
    """The seeded cluster centers (first RNG draw of gen_synthetic)."""
    return _rng(spec.seed).standard_normal((spec.classes, spec.input_dim))


def gen_synthetic(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian class clusters with the requested shift applied.

    The draw order (means, labels, noise) is fixed so that runs with the
    same seed share their base sample and differ only by the shift; the
    covariate case is therefore exactly the affine image of the
    unshifted data.
    """
    rng = _rng(spec.seed)
    means = rng.standard_normal((spec.classes, spec.input_dim))
    n = spec.total_samples

    if isinstance(spec.shift, PriorShift):
        labels = rng.choice(
            spec.classes, size=n, p=np.asarray(spec.shift.class_weights)
        )
    else:
        labels = np.repeat(np.arange(spec.classes), spec.samples_per_class)
    labels = labels.astype(np.int64)

    noise = rng.standard_normal((n, spec.input_dim))
    inputs = means[labels] + spec.cluster_spread * noise

    if isinstance(spec.shift, CovariateShift):
        inputs = spec.shift.apply(inputs)
    elif isinstance(spec.shift, ConceptShift):
        n_flip = int(round(spec.shift.label_flip_fraction * n))
        if n_flip > 0:
            idx = rng.choice(n, size=n_flip, replace=False)
            offset = rng.integers(1, spec.classes, size=n_flip)
            labels = labels.copy()
            labels[idx] = (labels[idx] + offset) % spec.classes
    return inputs, labels


@dataclass
class MlpBackbone:
    """Fully-connected rectifier network; hidden layers use ReLU."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def hidden_layer_ids(self) -> list[str]:
        return [f"h{i+1}" for i in range(len(self.weights) - 1)]


def forward_activations(bb: MlpBackbone, inputs) -> dict[str, np.ndarray]:
    """Per-layer activations: post-ReLU hiddens "h1".."hN" plus "out" logits."""
    x = np.asarray(inputs, dtype=np.float64)
    acts: dict[str, np.ndarray] = {}
    h = x
    last = len(bb.weights) - 1
    for i, (w, b) in enumerate(zip(bb.weights, bb.biases)):
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
            acts[f"h{i+1}"] = h
        else:
            acts["out"] = h
    return acts


def _forward_train(bb, x):
    # keeps pre-activation masks for backprop
    acts = [x]
    masks = []
    h = x
    last = len(bb.weights) - 1
    for i, (w, b) in enumerate(zip(bb.weights, bb.biases)):
        h = h @ w + b
        if i < last:
            mask = h > 0.0
            h = h * mask
            masks.append(mask)
        acts.append(h)
    return acts, masks


def train_backbone(
    inputs,
    labels,
    epochs: int = 200,
    lr: float = 0.1,
    seed: int = 0,
    hidden_dims: tuple[int, ...] = (64, 64, 32),
    batch_size: int = 32,
) -> MlpBackbone:
    """Mini-batch gradient descent on softmax cross-entropy.

    Weights start from seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in));
    each epoch shuffles the full sample and walks it in batches of
    batch_size. Deterministic in (inputs, labels, seed).
    """
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    n, d = x.shape
    n_classes = int(y.max()) + 1
    if n_classes < 2:
        raise ConfigError("need >= 2 classes to train")

    rng = _rng(seed)
    dims = [d, *hidden_dims, n_classes]
    weights, biases = [], []
    for din, dout in zip(dims[:-1], dims[1:]):
        bound = 1.0 / np.sqrt(din)
        weights.append(rng.uniform(-bound, bound, size=(din, dout)))
        biases.append(np.zeros(dout))
    bb = MlpBackbone(weights=weights, biases=biases)

    # non-finiteness is reported via the guard below, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            perm = rng.permutation(n)
            for start in range(0, n, batch_size):
                idx = perm[start : start + batch_size]
                xb, yb = x[idx], y[idx]
                acts, masks = _forward_train(bb, xb)
                logits = acts[-1]
                shifted = logits - logits.max(axis=1, keepdims=True)
                e = np.exp(shifted)
                probs = e / e.sum(axis=1, keepdims=True)
                if not np.all(np.isfinite(probs)):
                    raise NumericalError(
                        f"training diverged at epoch {epoch} (lr={lr})"
                    )
                grad = probs.copy()
                grad[np.arange(len(yb)), yb] -= 1.0
                grad /= len(yb)
                for i in reversed(range(len(bb.weights))):
                    gw = acts[i].T @ grad
                    gb = grad.sum(axis=0)
                    if i > 0:
                        grad = (grad @ bb.weights[i].T) * masks[i - 1]
                    bb.weights[i] = bb.weights[i] - lr * gw
                    bb.biases[i] = bb.biases[i] - lr * gb
    return bb


def evaluate_backbone(bb: MlpBackbone, inputs, labels) -> float:
    """Top-1 training-style accuracy of the output layer."""
    logits = forward_activations(bb, inputs)["out"]
    pred = np.argmax(logits, axis=1)
    return float(np.mean(pred == np.asarray(labels)))


def export_features(
    bb: MlpBackbone,
    inputs,
    labels,
    directory,
    split_name: str = "default",
    class_names: list[str] | None = None,
) -> Manifest:
    """Write every hidden layer plus the output logits via the feature store."""
    acts = forward_activations(bb, inputs)
    layer_ids = bb.hidden_layer_ids + ["out"]
    y = np.asarray(labels, dtype=np.int64)
    if class_names is None:
        class_names = [f"class{i}" for i in range(int(y.max()) + 1)]
    fs = FeatureSet(
        layer_ids=layer_ids,
        layers={lid: acts[lid] for lid in layer_ids},
        labels=y,
        class_names=class_names,
        split_name=split_name,
    )
    return write_feature_set(fs, directory)


def generate_domain_suite(
    out_dir,
    base: SyntheticSpec,
    domains: dict[str, Shift | None],
    train_seed: int = 0,
    epochs: int = 200,
    lr: float = 0.1,
    hidden_dims: tuple[int, ...] = (64, 64, 32),
) -> tuple[MlpBackbone, dict[str, Path]]:
    """Train one backbone on unshifted source data, export one feature
    directory per requested domain.

    The exported samples are a fresh draw (seed+1) so episode universes
    never reuse backbone training rows.
    """
    out_dir = Path(out_dir)
    src_spec = replace(base, shift=None)
    train_x, train_y = gen_synthetic(src_spec)
    bb = train_backbone(
        train_x, train_y, epochs=epochs, lr=lr, seed=train_seed,
        hidden_dims=hidden_dims,
    )

    class_names = [f"class{i}" for i in range(base.classes)]
    manifests: dict[str, Path] = {}
    for name, shift in domains.items():
        spec = replace(base, shift=shift, seed=base.seed + 1)
        x, y = gen_synthetic(spec)
        export_features(
            bb, x, y, out_dir / name, split_name=name, class_names=class_names
        )
        manifests[name] = out_dir / name / "manifest.json"
    return bb, manifests
