"""Hebbian heads and their logit-fused ensemble.

One head is a K x D weight matrix trained on support features by an
iterative rule: starting from zeros, each step computes the gradient of
the summed cross-entropy with respect to the logits and contracts it
against the features,

    V = softmax(Z W^T) - Y        W <- W - alpha * V^T Z

which is exactly one gradient-descent step with rate alpha on
sum_i CE(y_i, softmax(W z_i)). The loss is summed, not averaged, so the
update carries no hidden 1/(NK) factor. An ensemble holds one head per
layer and predicts from the raw sum of the per-layer query logits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .episodes import Episode
from .linalg import as_matrix, ce_grad_wrt_logits

__all__ = [
    "HebbianConfig",
    "HebbianHead",
    "EnsembleModel",
    "hebb_rule",
    "fit_ensemble",
    "predict",
    "accuracy",
    "onehot",
]

# Abort threshold for the divergence guard; alpha is user-supplied and a
# too-large rate blows W up geometrically.
_WEIGHT_LIMIT = 1e12


@dataclass(frozen=True)
class HebbianConfig:
    """Learning rate and step count of the iterative rule."""

    alpha: float = 0.01
    steps: int = 400

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")


@dataclass(frozen=True)
class HebbianHead:
    layer_id: str
    weights: np.ndarray  # K x D


@dataclass(frozen=True)
class EnsembleModel:
    heads: tuple[HebbianHead, ...]

    def __post_init__(self):
        ids = [h.layer_id for h in self.heads]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate layer ids in ensemble: {ids}")
        ways = {h.weights.shape[0] for h in self.heads}
        if len(ways) > 1:
            raise ConfigError(f"heads disagree on class count: {sorted(ways)}")


def onehot(labels, n_classes: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    out = np.zeros((y.shape[0], n_classes))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def hebb_rule(features, labels_onehot, cfg: HebbianConfig) -> np.ndarray:
    """Train one head; returns the final K x D weight matrix.

    Deterministic: zero initialization, cfg.steps iterations, no
    randomness anywhere. Raises NumericalError with the offending step
    index if the weights leave [-1e12, 1e12] or stop being finite.
    """
    z = as_matrix(features)
    y = as_matrix(labels_onehot)
    if z.shape[0] != y.shape[0]:
        raise ValueError(
            f"features have {z.shape[0]} rows, labels have {y.shape[0]}"
        )
    w = np.zeros((y.shape[1], z.shape[1]))
    # overflow is handled by the guard below, not by numpy warnings
    with np.errstate(over="ignore"):
        for step in range(cfg.steps):
            v = ce_grad_wrt_logits(y, z @ w.T)
            w = w - cfg.alpha * (v.T @ z)
            if not np.all(np.isfinite(w)) or np.abs(w).max() > _WEIGHT_LIMIT:
                raise NumericalError(
                    f"weights diverged at step {step} (alpha={cfg.alpha}); "
                    "reduce the learning rate"
                )
    return w


def fit_ensemble(
    ep: Episode, layer_ids: list[str], cfg: HebbianConfig
) -> EnsembleModel:
    """One head per layer, each trained independently on that layer's support."""
    if len(set(layer_ids)) != len(layer_ids):
        raise ConfigError(f"duplicate layer ids requested: {layer_ids}")
    missing = [lid for lid in layer_ids if lid not in ep.support]
    if missing:
        raise ConfigError(
            f"layer(s) {missing} not present in episode; "
            f"available: {sorted(ep.support)}"
        )
    n_classes = int(ep.class_map.shape[0])
    y = onehot(ep.support_labels, n_classes)
    heads = tuple(
        HebbianHead(layer_id=lid, weights=hebb_rule(ep.support[lid], y, cfg))
        for lid in layer_ids
    )
    return EnsembleModel(heads=heads)


def _zscore(block: np.ndarray) -> np.ndarray:
    std = block.std()
    if std == 0.0:
        return np.zeros_like(block)
    return (block - block.mean()) / std


def predict(
    model: EnsembleModel,
    query_layers: dict[str, np.ndarray],
    normalize_logits: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Fused query logits and argmax labels.

    Logits accumulate in head order (fixed summation order keeps results
    bit-stable under any outer parallelism). Ties at the argmax resolve
    to the lowest class index. normalize_logits z-scores each layer's
    logit block before summing; it is off by default because the plain
    raw sum is the reference behaviour.
    """
    if not model.heads:
        raise ConfigError("ensemble has no heads")
    logits: np.ndarray | None = None
    for head in model.heads:
        if head.layer_id not in query_layers:
            raise ConfigError(f"query features missing for layer {head.layer_id!r}")
        z = as_matrix(query_layers[head.layer_id])
        if z.shape[1] != head.weights.shape[1]:
            raise ValueError(
                f"layer {head.layer_id!r}: query dim {z.shape[1]} != "
                f"head dim {head.weights.shape[1]}"
            )
        block = z @ head.weights.T
        if normalize_logits:
            block = _zscore(block)
        logits = block if logits is None else logits + block
    labels = np.argmax(logits, axis=1).astype(np.int64)
    return logits, labels


def accuracy(predictions, truth) -> float:
    p = np.asarray(predictions)
    t = np.asarray(truth)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("cannot compute accuracy of empty vectors")
    return float(np.mean(p == t))
