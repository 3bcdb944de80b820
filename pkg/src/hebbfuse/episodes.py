"""Seeded N-shot K-way episode sampling.

Each episode draws K classes and, per class, disjoint support and query
sample indices from a FeatureSet. The RNG is a counter-based Philox
generator keyed by (master_seed, episode_index), so episode i is
byte-identical no matter in which order, or on how many workers, the
stream is consumed.

Support sizes are N per class, or the explicit per-class counts of
class_ratio when the imbalanced protocol is requested; query sets stay
balanced at Q per class either way so accuracies remain comparable
across ratios.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .errors import ConfigError
from .feature_store import FeatureSet

__all__ = ["EpisodeSpec", "Episode", "sample_episode", "episode_stream"]

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class EpisodeSpec:
    """Parameters of one N-shot K-way task draw.

    When class_ratio is given it lists the per-class support counts
    (length K, entries >= 1); the support size is then sum(class_ratio)
    and `shots` plays no role in sizing.
    """

    ways: int = 5
    shots: int = 5
    queries_per_class: int = 5
    master_seed: int = 0
    episode_index: int = 0
    class_ratio: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.ways < 2:
            raise ConfigError(f"ways must be >= 2, got {self.ways}")
        if self.shots < 1:
            raise ConfigError(f"shots must be >= 1, got {self.shots}")
        if self.queries_per_class < 1:
            raise ConfigError(
                f"queries_per_class must be >= 1, got {self.queries_per_class}"
            )
        if self.episode_index < 0:
            raise ConfigError(f"episode_index must be >= 0, got {self.episode_index}")
        if self.class_ratio is not None:
            ratio = tuple(int(c) for c in self.class_ratio)
            object.__setattr__(self, "class_ratio", ratio)
            if len(ratio) != self.ways:
                raise ConfigError(
                    f"class_ratio has {len(ratio)} entries, expected ways={self.ways}"
                )
            if any(c < 1 for c in ratio):
                raise ConfigError(f"class_ratio entries must be >= 1, got {ratio}")

    def support_counts(self) -> tuple[int, ...]:
        if self.class_ratio is not None:
            return self.class_ratio
        return (self.shots,) * self.ways


@dataclass(frozen=True)
class Episode:
    """One sampled task: per-layer support/query matrices plus labels.

    class_map[j] is the original class index assigned episode label j;
    support_indices/query_indices hold the original row indices, which
    makes the disjointness contract directly auditable.
    """

    support: dict[str, np.ndarray]
    support_labels: np.ndarray
    query: dict[str, np.ndarray]
    query_labels: np.ndarray
    class_map: np.ndarray
    support_indices: np.ndarray
    query_indices: np.ndarray


def _episode_rng(master_seed: int, episode_index: int) -> np.random.Generator:
    key = (int(master_seed) & _MASK64) | (int(episode_index) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_episode(fs: FeatureSet, spec: EpisodeSpec) -> Episode:
    """Draw one episode, fully determined by (fs, spec).

    Draw order is fixed: classes without replacement, then per chosen
    class the support indices followed by the query indices, also
    without replacement.
    """
    labels = np.asarray(fs.labels)
    n_classes = len(fs.class_names)
    if n_classes < spec.ways:
        raise ConfigError(
            f"need {spec.ways} classes but feature set has only {n_classes}"
        )

    rng = _episode_rng(spec.master_seed, spec.episode_index)
    chosen = rng.choice(n_classes, size=spec.ways, replace=False)
    counts = spec.support_counts()
    q = spec.queries_per_class

    sup_idx_parts: list[np.ndarray] = []
    qry_idx_parts: list[np.ndarray] = []
    for j, cls in enumerate(chosen):
        pool = np.flatnonzero(labels == cls)
        need = counts[j] + q
        if pool.size < need:
            raise ConfigError(
                f"class {fs.class_names[cls]!r} (index {cls}) has {pool.size} "
                f"samples but the episode needs {counts[j]} support + {q} query"
            )
        picked = rng.choice(pool, size=need, replace=False)
        sup_idx_parts.append(picked[: counts[j]])
        qry_idx_parts.append(picked[counts[j] :])

    sup_idx = np.concatenate(sup_idx_parts)
    qry_idx = np.concatenate(qry_idx_parts)
    sup_labels = np.repeat(np.arange(spec.ways), counts).astype(np.int64)
    qry_labels = np.repeat(np.arange(spec.ways), q).astype(np.int64)

    support = {lid: fs.layers[lid][sup_idx] for lid in fs.layer_ids}
    query = {lid: fs.layers[lid][qry_idx] for lid in fs.layer_ids}
    return Episode(
        support=support,
        support_labels=sup_labels,
        query=query,
        query_labels=qry_labels,
        class_map=np.asarray(chosen, dtype=np.int64),
        support_indices=sup_idx.astype(np.int64),
        query_indices=qry_idx.astype(np.int64),
    )


def episode_stream(
    fs: FeatureSet, base_spec: EpisodeSpec, count: int
) -> Iterator[Episode]:
    """Episodes 0..count-1 of the (fs, base_spec) stream."""
    if count < 0:
        raise ConfigError(f"episode count must be >= 0, got {count}")
    for i in range(count):
        yield sample_episode(fs, replace(base_spec, episode_index=i))
