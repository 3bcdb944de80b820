"""Command-line surface.

Subcommands: toy-gen (synthetic data + backbone + feature export), eval
(episode-batch evaluation), ablate (per-layer grid + ensemble), fid
(domain-shift measurement), inspect (manifest summary). Exit codes:
0 success, 2 config error, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import KnnConfig, RidgeConfig
from .errors import ConfigError, DataError, NumericalError
from .feature_store import read_feature_set
from .harness import RunConfig, run_ablation, run_eval, run_fid
from .hebbian import HebbianConfig
from .toy_backbone import (
    ConceptShift,
    CovariateShift,
    PriorShift,
    SyntheticSpec,
    evaluate_backbone,
    gen_synthetic,
    generate_domain_suite,
)

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {exc}")


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats: {exc}")


def _csv_names(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="manifest.json of the episode universe")
    p.add_argument("--learner", choices=["hebbian", "knn", "ridge"], default="hebbian")
    p.add_argument("--layers", type=_csv_names, required=True,
                   help="comma-separated layer ids, e.g. h1,h2,h3,out")
    p.add_argument("--ways", type=int, default=5)
    p.add_argument("--shots", type=int, default=5)
    p.add_argument("--queries", type=int, default=5)
    p.add_argument("--episodes", type=int, default=800)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.01, help="hebbian learning rate")
    p.add_argument("--steps", type=int, default=400, help="hebbian rule steps")
    p.add_argument("--k", type=int, default=3, help="knn neighbour count")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-3,
                   help="ridge regularization")
    p.add_argument("--class-ratio", type=_csv_ints, default=None,
                   help="per-class support counts, e.g. 5,45 (overrides --shots sizing)")
    p.add_argument("--normalize-logits", action="store_true",
                   help="z-score per-layer logits before summing (hebbian)")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out", type=Path, default=None, help="output path (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="episode-level parallelism")


def _run_config(args) -> RunConfig:
    if args.learner == "hebbian":
        learner_cfg = HebbianConfig(alpha=args.alpha, steps=args.steps)
    elif args.learner == "knn":
        learner_cfg = KnnConfig(k=args.k)
    else:
        learner_cfg = RidgeConfig(lam=args.lam)
    return RunConfig(
        manifest=args.manifest,
        learner=args.learner,
        learner_config=learner_cfg,
        layers=tuple(args.layers),
        ways=args.ways,
        shots=args.shots,
        queries=args.queries,
        episodes=args.episodes,
        seed=args.seed,
        class_ratio=args.class_ratio,
        normalize_logits=args.normalize_logits,
        jobs=args.jobs,
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _cmd_eval(args) -> int:
    report = run_eval(_run_config(args))
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return 0


def _cmd_ablate(args) -> int:
    report = run_ablation(_run_config(args))
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return 0


def _cmd_fid(args) -> int:
    report = run_fid(args.manifest_a, args.manifest_b, args.layer)
    _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return 0


def _cmd_inspect(args) -> int:
    fs = read_feature_set(args.manifest)
    if args.format == "json":
        doc = {
            "split_name": fs.split_name,
            "sample_count": fs.sample_count,
            "class_names": fs.class_names,
            "layers": [
                {"name": lid, "dim": fs.layer_dim(lid)} for lid in fs.layer_ids
            ],
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        lines = [
            f"split:    {fs.split_name}",
            f"samples:  {fs.sample_count}",
            f"classes:  {len(fs.class_names)} ({', '.join(fs.class_names)})",
            "layers:",
        ]
        lines += [
            f"  {lid:<12} dim {fs.layer_dim(lid)}" for lid in fs.layer_ids
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_toy_gen(args) -> int:
    shifts: dict = {}
    for name in args.shifts:
        if name == "none":
            shifts["source"] = None
        elif name == "prior":
            weights = args.prior_weights
            if weights is None:
                # default: one heavy class, rest uniform
                heavy = 0.55
                rest = (1.0 - heavy) / (args.classes - 1)
                weights = (heavy,) + (rest,) * (args.classes - 1)
            shifts["prior"] = PriorShift(class_weights=weights)
        elif name == "covariate":
            shifts["covariate"] = CovariateShift(
                rotation_deg=args.rotation_deg,
                translation=args.translate,
                scale=args.scale,
            )
        elif name == "concept":
            shifts["concept"] = ConceptShift(label_flip_fraction=args.flip_fraction)
        else:
            raise ConfigError(
                f"unknown shift {name!r} (none, prior, covariate, concept)"
            )

    base = SyntheticSpec(
        classes=args.classes,
        input_dim=args.input_dim,
        samples_per_class=args.samples_per_class,
        cluster_spread=args.spread,
        seed=args.seed,
    )
    bb, manifests = generate_domain_suite(
        args.out,
        base,
        shifts,
        train_seed=args.train_seed,
        epochs=args.epochs,
        lr=args.lr,
        hidden_dims=tuple(args.hidden_dims),
    )
    train_x, train_y = gen_synthetic(base)
    acc = evaluate_backbone(bb, train_x, train_y)
    sys.stdout.write(f"backbone training accuracy: {acc:.4f}\n")
    for name, path in manifests.items():
        sys.stdout.write(f"{name}: {path}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hebbfuse",
        description="Few-shot evaluation over stored per-layer features",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy-gen", help="synthetic data + backbone + feature export")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--input-dim", type=int, default=16)
    p.add_argument("--samples-per-class", type=int, default=120)
    p.add_argument("--spread", type=float, default=0.45, help="cluster noise std")
    p.add_argument("--seed", type=int, default=7, help="data seed")
    p.add_argument("--train-seed", type=int, default=11)
    p.add_argument("--epochs", type=int, default=150)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--hidden-dims", type=_csv_ints, default=(64, 64, 32))
    p.add_argument("--shifts", type=_csv_names, default=("none",),
                   help="domains to export: none,prior,covariate,concept")
    p.add_argument("--prior-weights", type=_csv_floats, default=None)
    p.add_argument("--rotation-deg", type=float, default=90.0)
    p.add_argument("--translate", type=float, default=1.5)
    p.add_argument("--scale", type=float, default=1.6)
    p.add_argument("--flip-fraction", type=float, default=0.2)
    p.set_defaults(fn=_cmd_toy_gen)

    p = sub.add_parser("eval", help="run an episode batch with one learner")
    _add_eval_flags(p)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("ablate", help="per-layer grid plus ensemble on paired episodes")
    _add_eval_flags(p)
    p.set_defaults(fn=_cmd_ablate)

    p = sub.add_parser("fid", help="Frechet distance between two stored populations")
    p.add_argument("--manifest-a", required=True)
    p.add_argument("--manifest-b", required=True)
    p.add_argument("--layer", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(fn=_cmd_fid)

    p = sub.add_parser("inspect", help="validate a manifest and summarize it")
    p.add_argument("--manifest", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(fn=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
