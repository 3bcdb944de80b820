"""Non-Hebbian heads for learner ablations, behind one fit/score contract.

k-NN votes with class frequencies among the k nearest support rows
(euclidean); the ridge head is the closed-form minimizer of
||Y - Z W^T||^2 + lambda ||W||^2. Both slot into the same per-layer
ensembling as the Hebbian head: per-layer score matrices are summed in
layer order and the argmax (lowest index on ties) is the prediction.
For k-NN the summed scores are per-layer class frequencies, for the
others they are logits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .episodes import Episode
from .hebbian import HebbianConfig, fit_ensemble, onehot, predict
from .linalg import as_matrix

__all__ = [
    "KnnConfig",
    "RidgeConfig",
    "knn_predict",
    "ridge_fit",
    "learner_for",
    "HebbianLearner",
    "KnnLearner",
    "RidgeLearner",
]


@dataclass(frozen=True)
class KnnConfig:
    k: int = 3
    metric: str = "euclidean"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.metric != "euclidean":
            raise ConfigError(f"unsupported metric {self.metric!r}")


@dataclass(frozen=True)
class RidgeConfig:
    lam: float = 1e-3

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")


def knn_predict(
    support, support_labels, queries, cfg: KnnConfig, n_classes: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force k-NN with fully deterministic tie handling.

    scores[q, c] = |{class-c rows among the k nearest}| / k. Neighbour
    ties at the k-th distance go to the lowest support row index (stable
    sort over exact squared distances); prediction ties go to the lowest
    class index.
    """
    s = as_matrix(support)
    q = as_matrix(queries)
    labels = np.asarray(support_labels, dtype=np.int64)
    if s.shape[0] != labels.shape[0]:
        raise ValueError(
            f"support has {s.shape[0]} rows, labels have {labels.shape[0]}"
        )
    if s.shape[1] != q.shape[1]:
        raise ValueError(f"dim mismatch: support {s.shape[1]} vs query {q.shape[1]}")
    if cfg.k > s.shape[0]:
        raise ConfigError(f"k={cfg.k} exceeds support size {s.shape[0]}")
    if n_classes is None:
        n_classes = int(labels.max()) + 1

    diff = q[:, None, :] - s[None, :, :]
    d2 = np.einsum("qsd,qsd->qs", diff, diff)
    order = np.argsort(d2, axis=1, kind="stable")[:, : cfg.k]
    neighbour_classes = labels[order]

    scores = np.zeros((q.shape[0], n_classes))
    for c in range(n_classes):
        scores[:, c] = (neighbour_classes == c).sum(axis=1)
    scores /= cfg.k
    return scores, np.argmax(scores, axis=1).astype(np.int64)


def ridge_fit(features, labels_onehot, cfg: RidgeConfig) -> np.ndarray:
    """Closed-form ridge head W = Y^T Z (Z^T Z + lambda I)^{-1}, shape K x D."""
    z = as_matrix(features)
    y = as_matrix(labels_onehot)
    if z.shape[0] != y.shape[0]:
        raise ValueError(
            f"features have {z.shape[0]} rows, labels have {y.shape[0]}"
        )
    n, d = z.shape
    if cfg.lam == 0 and n < d:
        raise ConfigError(
            f"lambda=0 needs support count >= feature dim, got {n} < {d}"
        )
    gram = z.T @ z + cfg.lam * np.eye(d)
    if cfg.lam == 0:
        # Z^T Z is exactly singular for rank-deficient Z; solve() happily
        # returns garbage for the nearly-singular case, so check first.
        if np.linalg.matrix_rank(gram) < d:
            raise NumericalError(
                "singular system: lambda=0 with rank-deficient features"
            )
    try:
        wt = np.linalg.solve(gram, z.T @ y)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"ridge solve failed: {exc}") from exc
    return wt.T


class HebbianLearner:
    """Hebbian heads + summed-logit fusion behind the fit/score contract."""

    kind = "hebbian"

    def __init__(self, cfg: HebbianConfig | None = None, normalize_logits=False):
        self.cfg = cfg or HebbianConfig()
        self.normalize_logits = normalize_logits
        self._model = None

    def fit(self, ep: Episode, layer_ids: list[str]):
        self._model = fit_ensemble(ep, layer_ids, self.cfg)
        return self

    def score(self, query_layers: dict[str, np.ndarray]) -> np.ndarray:
        if self._model is None:
            raise ConfigError("score() before fit()")
        scores, _ = predict(self._model, query_layers, self.normalize_logits)
        return scores


class KnnLearner:
    kind = "knn"

    def __init__(self, cfg: KnnConfig | None = None):
        self.cfg = cfg or KnnConfig()
        self._support: dict[str, np.ndarray] | None = None
        self._labels: np.ndarray | None = None
        self._layer_ids: list[str] = []
        self._n_classes = 0

    def fit(self, ep: Episode, layer_ids: list[str]):
        missing = [lid for lid in layer_ids if lid not in ep.support]
        if missing:
            raise ConfigError(f"layer(s) {missing} not present in episode")
        if self.cfg.k > ep.support_labels.shape[0]:
            raise ConfigError(
                f"k={self.cfg.k} exceeds support size {ep.support_labels.shape[0]}"
            )
        self._support = {lid: ep.support[lid] for lid in layer_ids}
        self._labels = ep.support_labels
        self._layer_ids = list(layer_ids)
        self._n_classes = int(ep.class_map.shape[0])
        return self

    def score(self, query_layers: dict[str, np.ndarray]) -> np.ndarray:
        if self._support is None:
            raise ConfigError("score() before fit()")
        total = None
        for lid in self._layer_ids:
            scores, _ = knn_predict(
                self._support[lid],
                self._labels,
                query_layers[lid],
                self.cfg,
                n_classes=self._n_classes,
            )
            total = scores if total is None else total + scores
        return total


class RidgeLearner:
    kind = "ridge"

    def __init__(self, cfg: RidgeConfig | None = None):
        self.cfg = cfg or RidgeConfig()
        self._weights: dict[str, np.ndarray] = {}
        self._layer_ids: list[str] = []

    def fit(self, ep: Episode, layer_ids: list[str]):
        missing = [lid for lid in layer_ids if lid not in ep.support]
        if missing:
            raise ConfigError(f"layer(s) {missing} not present in episode")
        y = onehot(ep.support_labels, int(ep.class_map.shape[0]))
        self._layer_ids = list(layer_ids)
        self._weights = {
            lid: ridge_fit(ep.support[lid], y, self.cfg) for lid in layer_ids
        }
        return self

    def score(self, query_layers: dict[str, np.ndarray]) -> np.ndarray:
        if not self._weights:
            raise ConfigError("score() before fit()")
        total = None
        for lid in self._layer_ids:
            block = as_matrix(query_layers[lid]) @ self._weights[lid].T
            total = block if total is None else total + block
        return total


def learner_for(kind: str, cfg=None):
    """Factory for the shared fit/score interface used by the harness."""
    if kind == "hebbian":
        return HebbianLearner(cfg)
    if kind == "knn":
        return KnnLearner(cfg)
    if kind == "ridge":
        return RidgeLearner(cfg)
    raise ConfigError(f"unknown learner kind {kind!r} (hebbian, knn, ridge)")
