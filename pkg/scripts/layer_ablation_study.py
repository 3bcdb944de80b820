#!/usr/bin/env python3
"""Learner x layer ablation grid on the toy suite.

For every learner (hebbian, knn, ridge) and both the source and the
covariate-shifted domain, evaluates each exported layer alone plus the
fused ensemble on one shared episode stream, and prints the grid of mean
accuracies with 95% half-widths.
"""

import argparse
import tempfile
from pathlib import Path

from hebbfuse.baselines import KnnConfig, RidgeConfig
from hebbfuse.harness import RunConfig, run_ablation
from hebbfuse.hebbian import HebbianConfig
from hebbfuse.toy_backbone import CovariateShift, SyntheticSpec, generate_domain_suite

LEARNERS = {
    "hebbian": HebbianConfig(alpha=0.01, steps=400),
    "knn": KnnConfig(k=3),
    "ridge": RidgeConfig(lam=1e-3),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=200)
    parser.add_argument("--seed", type=int, default=97)
    parser.add_argument("--jobs", type=int, default=4)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args()

    workdir = args.out or Path(tempfile.mkdtemp(prefix="ablation_"))
    base = SyntheticSpec(classes=10, input_dim=16, samples_per_class=120,
                         cluster_spread=0.45, seed=7)
    domains = {
        "source": None,
        "covariate": CovariateShift(rotation_deg=90.0, translation=1.5, scale=1.6),
    }
    print(f"building toy suite under {workdir} ...")
    _, manifests = generate_domain_suite(workdir, base, domains,
                                         train_seed=11, epochs=150, lr=0.1)

    for domain, manifest in manifests.items():
        print(f"\n=== {domain} domain, {args.episodes} episodes, "
              f"5-way 5-shot ===")
        header = None
        for kind, learner_cfg in LEARNERS.items():
            cfg = RunConfig(
                manifest=str(manifest), learner=kind, learner_config=learner_cfg,
                layers=("h1", "h2", "h3", "out"), ways=5, shots=5, queries=5,
                episodes=args.episodes, seed=args.seed, jobs=args.jobs,
            )
            report = run_ablation(cfg)
            cols = {r.layer: r for r in report.per_layer}
            order = ["ensemble", "out", "h3", "h2", "h1"]
            if header is None:
                header = f"{'learner':<10}" + "".join(f"{c:>16}" for c in order)
                print(header)
            cells = "".join(
                f"  {cols[c].mean_accuracy:6.4f}+-{cols[c].ci95_halfwidth:5.4f}"
                for c in order
            )
            print(f"{kind:<10}{cells}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
