"""Episode-batch evaluation: accuracy aggregation, ablation grids, FID runs.

Reports are self-auditing: the emitted per-episode accuracies always
allow recomputing the mean and the confidence half-width. The 95%
interval uses the normal approximation 1.96 * s / sqrt(E) over
per-episode accuracies (sample std, divisor E-1); a single-episode run
has no spread estimate and is flagged degenerate with half-width 0.

Episodes are independent work items, so --jobs > 1 simply maps them over
a thread pool; aggregation happens in episode-index order and every
episode is a pure function of (manifest bytes, config), which makes
report bodies byte-identical at any parallelism degree. Wall time is the
one volatile field and lives in a separate timing block.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .baselines import KnnConfig, RidgeConfig, learner_for
from .episodes import EpisodeSpec, sample_episode
from .errors import ConfigError, ToolkitError
from .feature_store import FeatureSet, read_feature_set, select_layers
from .fid import fid_between_sets
from .hebbian import HebbianConfig, accuracy

__all__ = [
    "RunConfig",
    "LayerResult",
    "ci95_halfwidth",
    "EvalReport",
    "FidReport",
    "run_eval",
    "run_ablation",
    "run_fid",
]

Z95 = 1.96


def ci95_halfwidth(accs) -> tuple[float, bool]:
    """Normal-approximation half-width 1.96*s/sqrt(E); flags E < 2 as degenerate."""
    accs = np.asarray(accs, dtype=np.float64)
    if accs.shape[0] < 2:
        return 0.0, True
    s = float(np.std(accs, ddof=1))
    return Z95 * s / float(np.sqrt(accs.shape[0])), False


@dataclass(frozen=True)
class RunConfig:
    """Everything one evaluation run depends on, echoed into its report."""

    manifest: str | None
    learner: str = "hebbian"
    learner_config: HebbianConfig | KnnConfig | RidgeConfig | None = None
    layers: tuple[str, ...] = ()
    ways: int = 5
    shots: int = 5
    queries: int = 5
    episodes: int = 800
    seed: int = 0
    class_ratio: tuple[int, ...] | None = None
    normalize_logits: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if not self.layers:
            raise ConfigError("layer set must be non-empty")
        if self.learner not in ("hebbian", "knn", "ridge"):
            raise ConfigError(f"unknown learner {self.learner!r}")

    def episode_spec(self) -> EpisodeSpec:
        return EpisodeSpec(
            ways=self.ways,
            shots=self.shots,
            queries_per_class=self.queries,
            master_seed=self.seed,
            class_ratio=self.class_ratio,
        )

    def make_learner(self):
        learner = learner_for(self.learner, self.learner_config)
        if self.learner == "hebbian":
            learner.normalize_logits = self.normalize_logits
        return learner

    def echo(self) -> dict:
        cfg = self.learner_config
        cfg_dict = None
        if isinstance(cfg, HebbianConfig):
            cfg_dict = {"alpha": cfg.alpha, "steps": cfg.steps}
        elif isinstance(cfg, KnnConfig):
            cfg_dict = {"k": cfg.k, "metric": cfg.metric}
        elif isinstance(cfg, RidgeConfig):
            cfg_dict = {"lambda": cfg.lam}
        return {
            "manifest": self.manifest,
            "learner": self.learner,
            "learner_config": cfg_dict,
            "layers": list(self.layers),
            "ways": self.ways,
            "shots": self.shots,
            "queries": self.queries,
            "episodes": self.episodes,
            "seed": self.seed,
            "class_ratio": list(self.class_ratio) if self.class_ratio else None,
            "normalize_logits": self.normalize_logits,
        }


@dataclass(frozen=True)
class LayerResult:
    layer: str
    per_episode_accuracies: tuple[float, ...]
    mean_accuracy: float
    ci95_halfwidth: float
    degenerate_ci: bool


@dataclass
class EvalReport:
    config: dict
    per_episode_accuracies: tuple[float, ...]
    mean_accuracy: float
    ci95_halfwidth: float
    degenerate_ci: bool
    per_layer: tuple[LayerResult, ...] = ()
    episode_class_maps: tuple[tuple[int, ...], ...] | None = None
    wall_time_s: float = 0.0

    def body_dict(self) -> dict:
        results: dict = {
            "mean_accuracy": self.mean_accuracy,
            "ci95_halfwidth": self.ci95_halfwidth,
            "degenerate_ci": self.degenerate_ci,
            "per_episode_accuracies": list(self.per_episode_accuracies),
        }
        if self.per_layer:
            results["per_layer"] = [
                {
                    "layer": r.layer,
                    "mean_accuracy": r.mean_accuracy,
                    "ci95_halfwidth": r.ci95_halfwidth,
                    "degenerate_ci": r.degenerate_ci,
                    "per_episode_accuracies": list(r.per_episode_accuracies),
                }
                for r in self.per_layer
            ]
        if self.episode_class_maps is not None:
            results["episode_class_maps"] = [list(m) for m in self.episode_class_maps]
        return {
            "schema": "hebbfuse/eval-report/v1",
            "config": self.config,
            "results": results,
        }

    def body_json(self) -> str:
        """Deterministic report body: everything except timing."""
        return json.dumps(self.body_dict(), indent=2) + "\n"

    def to_json(self) -> str:
        doc = self.body_dict()
        doc["timing"] = {"wall_time_s": self.wall_time_s}
        return json.dumps(doc, indent=2) + "\n"

    def _echo_columns(self) -> tuple[list[str], list[str]]:
        cfg = self.config
        lc = cfg.get("learner_config") or {}
        lc_str = ";".join(f"{k}={v}" for k, v in lc.items())
        ratio = cfg.get("class_ratio")
        names = ["ways", "shots", "queries", "episodes", "seed", "class_ratio",
                 "learner_config"]
        values = [
            str(cfg["ways"]), str(cfg["shots"]), str(cfg["queries"]),
            str(cfg["episodes"]), str(cfg["seed"]),
            "|".join(str(c) for c in ratio) if ratio else "",
            lc_str,
        ]
        return names, values

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        echo_names, echo_values = self._echo_columns()
        if self.per_layer:
            # learner x layer grid, ensemble column first (ablation table shape)
            cols = [r.layer for r in self.per_layer]
            cols = ["ensemble"] + [c for c in cols if c != "ensemble"]
            by_name = {r.layer: r for r in self.per_layer}
            header = (
                ["learner"] + cols + [f"{c}_ci95" for c in cols] + echo_names
            )
            row = (
                [self.config["learner"]]
                + [repr(by_name[c].mean_accuracy) for c in cols]
                + [repr(by_name[c].ci95_halfwidth) for c in cols]
                + echo_values
            )
        else:
            header = (
                ["learner", "layers", "mean_accuracy", "ci95_halfwidth",
                 "degenerate_ci"] + echo_names
            )
            row = (
                [self.config["learner"], "|".join(self.config["layers"]),
                 repr(self.mean_accuracy), repr(self.ci95_halfwidth),
                 str(self.degenerate_ci).lower()] + echo_values
            )
        writer.writerow(header)
        writer.writerow(row)
        return buf.getvalue()


def _load_universe(cfg: RunConfig, fs: FeatureSet | None) -> FeatureSet:
    if fs is None:
        if cfg.manifest is None:
            raise ConfigError("no manifest path and no in-memory feature set")
        fs = read_feature_set(cfg.manifest)
    return select_layers(fs, list(cfg.layers))


def _map_episodes(cfg: RunConfig, fn, count: int) -> list:
    def wrapped(i: int):
        try:
            return fn(i)
        except ToolkitError as exc:
            raise type(exc)(f"episode {i}: {exc}") from exc

    if cfg.jobs == 1:
        return [wrapped(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(wrapped, range(count)))


def run_eval(cfg: RunConfig, fs: FeatureSet | None = None) -> EvalReport:
    """Fit on support, score queries, aggregate accuracy over E episodes."""
    t0 = time.perf_counter()
    universe = _load_universe(cfg, fs)
    base_spec = cfg.episode_spec()
    layer_ids = list(cfg.layers)

    def eval_one(i: int) -> float:
        ep = sample_episode(universe, replace(base_spec, episode_index=i))
        learner = cfg.make_learner()
        learner.fit(ep, layer_ids)
        scores = learner.score(ep.query)
        pred = np.argmax(scores, axis=1).astype(np.int64)
        return accuracy(pred, ep.query_labels)

    accs = np.array(_map_episodes(cfg, eval_one, cfg.episodes))
    half, degenerate = ci95_halfwidth(accs)
    report = EvalReport(
        config=cfg.echo(),
        per_episode_accuracies=tuple(float(a) for a in accs),
        mean_accuracy=float(np.mean(accs)),
        ci95_halfwidth=half,
        degenerate_ci=degenerate,
        wall_time_s=time.perf_counter() - t0,
    )
    return report


def run_ablation(cfg: RunConfig, fs: FeatureSet | None = None) -> EvalReport:
    """Each layer alone plus the full ensemble, on one shared episode stream.

    All columns of an episode come from the same sampled support/query
    rows, so per-layer and ensemble results are paired; the report logs
    each episode's chosen classes to make the pairing auditable. The
    top-level accuracy is the ensemble's.
    """
    t0 = time.perf_counter()
    if "ensemble" in cfg.layers:
        raise ConfigError('layer name "ensemble" collides with the ensemble row')
    universe = _load_universe(cfg, fs)
    base_spec = cfg.episode_spec()
    layer_ids = list(cfg.layers)

    def eval_one(i: int):
        ep = sample_episode(universe, replace(base_spec, episode_index=i))
        blocks = []
        layer_accs = []
        for lid in layer_ids:
            learner = cfg.make_learner()
            learner.fit(ep, [lid])
            scores = learner.score(ep.query)
            pred = np.argmax(scores, axis=1).astype(np.int64)
            layer_accs.append(accuracy(pred, ep.query_labels))
            blocks.append(scores)
        fused = blocks[0].copy()
        for b in blocks[1:]:
            fused += b
        ens_pred = np.argmax(fused, axis=1).astype(np.int64)
        ens_acc = accuracy(ens_pred, ep.query_labels)
        return layer_accs, ens_acc, tuple(int(c) for c in ep.class_map)

    rows = _map_episodes(cfg, eval_one, cfg.episodes)
    per_layer_accs = np.array([r[0] for r in rows])  # E x L
    ens_accs = np.array([r[1] for r in rows])
    class_maps = tuple(r[2] for r in rows)

    layer_results = []
    for j, lid in enumerate(layer_ids):
        col = per_layer_accs[:, j]
        half, degenerate = ci95_halfwidth(col)
        layer_results.append(
            LayerResult(
                layer=lid,
                per_episode_accuracies=tuple(float(a) for a in col),
                mean_accuracy=float(np.mean(col)),
                ci95_halfwidth=half,
                degenerate_ci=degenerate,
            )
        )
    half, degenerate = ci95_halfwidth(ens_accs)
    layer_results.append(
        LayerResult(
            layer="ensemble",
            per_episode_accuracies=tuple(float(a) for a in ens_accs),
            mean_accuracy=float(np.mean(ens_accs)),
            ci95_halfwidth=half,
            degenerate_ci=degenerate,
        )
    )

    return EvalReport(
        config=cfg.echo(),
        per_episode_accuracies=tuple(float(a) for a in ens_accs),
        mean_accuracy=float(np.mean(ens_accs)),
        ci95_halfwidth=half,
        degenerate_ci=degenerate,
        per_layer=tuple(layer_results),
        episode_class_maps=class_maps,
        wall_time_s=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class FidReport:
    fid: float
    layer: str
    dim: int
    n_a: int
    n_b: int
    manifest_a: str
    manifest_b: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "hebbfuse/fid-report/v1",
                "fid": self.fid,
                "layer": self.layer,
                "dim": self.dim,
                "n_a": self.n_a,
                "n_b": self.n_b,
                "manifest_a": self.manifest_a,
                "manifest_b": self.manifest_b,
            },
            indent=2,
        ) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["layer", "dim", "n_a", "n_b", "fid"])
        writer.writerow([self.layer, self.dim, self.n_a, self.n_b, repr(self.fid)])
        return buf.getvalue()


def run_fid(manifest_a, manifest_b, layer_id: str) -> FidReport:
    fs_a = read_feature_set(manifest_a)
    fs_b = read_feature_set(manifest_b)
    value = fid_between_sets(fs_a, fs_b, layer_id)
    return FidReport(
        fid=value,
        layer=layer_id,
        dim=fs_a.layer_dim(layer_id),
        n_a=fs_a.sample_count,
        n_b=fs_b.sample_count,
        manifest_a=str(manifest_a),
        manifest_b=str(manifest_b),
    )
