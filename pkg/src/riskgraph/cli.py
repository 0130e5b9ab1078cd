"""Command-line entry point.

Subcommands: synth, train, eval, infogain, predict. Heavy imports happen
after argument parsing so --threads can cap the BLAS pool before numpy
loads. Every command writes a JSON manifest into its output directory;
report-style commands also render a matplotlib figure next to their
delimited output.

Exit codes: 0 success, 1 input/data error, 2 configuration error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from riskgraph import __version__
from riskgraph.errors import (
    ConfigError,
    FormatError,
    IntegrityError,
    InternalError,
    LoadError,
    RiskGraphError,
)

SEED_ENV = "RISKGRAPH_SEED"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskgraph",
        description="Knowledge-graph risk classifier over social cohorts",
    )
    parser.add_argument("--threads", type=int, default=0,
                        help="cap BLAS worker threads (0 = library default)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort directory")
    p.add_argument("--out", required=True, help="output cohort directory")
    p.add_argument("--users", type=int, default=600)
    p.add_argument("--balance", type=float, default=0.5,
                   help="positive-class fraction (binary profile only)")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--profile", choices=("weibo", "reddit"), default="weibo")
    p.add_argument("--planted-category", default=None,
                   help="plant class signal in one category only (binary fixtures)")
    p.add_argument("--text-signal", type=float, default=None,
                   help="override embedding signal strength")
    p.add_argument("--force", action="store_true",
                   help="overwrite a non-empty output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model on a cohort")
    p.add_argument("--data", required=True, help="cohort directory")
    p.add_argument("--config", default=None, help="run-configuration file")
    p.add_argument("--model-out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on one split")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", choices=("validation", "test"), default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("infogain", help="rank properties and categories by info gain")
    p.add_argument("--data", required=True)
    p.add_argument("--model", default=None,
                   help="also rank the model's learned post-behavior dims")
    p.add_argument("--out", required=True, help="CSV file to write")
    p.set_defaults(func=cmd_infogain)

    p = sub.add_parser("predict", help="classify one user with attention diagnostics")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--user", required=True)
    p.set_defaults(func=cmd_predict)
    return parser


def _seed_from(args_seed: int | None) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return args_seed if args_seed is not None else 7


def _write_manifest(out_dir: Path, command: str, seed: int | None,
                    config: dict, inputs: dict, outputs: dict, started: float) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "seed": seed,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "started_at": datetime.fromtimestamp(started, tz=timezone.utc).isoformat(),
        "finished_at": datetime.now(tz=timezone.utc).isoformat(),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, out_dir / "manifest.json")


def cmd_synth(args) -> int:
    started = time.time()
    from riskgraph.data_model.io import save_cohort
    from riskgraph.data_model.synth import (
        generate_synthetic_cohort,
        planted_config,
        reddit_config,
        weibo_config,
    )

    if args.users < 4:
        raise ConfigError(f"--users must be at least 4, got {args.users}")
    seed = _seed_from(args.seed)
    if args.planted_category:
        config = planted_config(args.planted_category, users=args.users)
    elif args.profile == "reddit":
        config = reddit_config(users=args.users)
    else:
        if not 0.0 < args.balance < 1.0:
            raise ConfigError(f"--balance must be in (0,1), got {args.balance}")
        config = weibo_config(users=args.users, balance=args.balance)
    if args.text_signal is not None:
        from dataclasses import replace

        config = replace(config, text_signal=args.text_signal, image_signal=args.text_signal)

    dataset = generate_synthetic_cohort(config, seed)
    out_dir = Path(args.out)
    save_cohort(dataset, out_dir, force=args.force)
    _write_manifest(
        out_dir, "synth", seed,
        config={
            "profile": config.profile,
            "users": config.users,
            "class_fracs": list(config.class_fracs),
            "planted_category": config.planted_category,
            "text_signal": config.text_signal,
            "image_signal": config.image_signal,
        },
        inputs={},
        outputs={"cohort": str(out_dir)},
        started=started,
    )
    print(f"wrote {len(dataset.users)}-user cohort to {out_dir}")
    return 0


def cmd_train(args) -> int:
    started = time.time()
    from dataclasses import asdict, replace

    from riskgraph import figures
    from riskgraph.config_file import parse_train_config
    from riskgraph.data_model.io import load_cohort
    from riskgraph.train_eval.pipeline import TrainConfig, train

    data_dir = Path(args.data)
    if not data_dir.is_dir():
        raise LoadError(f"data directory {data_dir} does not exist")
    config = parse_train_config(args.config) if args.config else TrainConfig()
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        config = replace(config, seed=_seed_from(None))

    dataset = load_cohort(data_dir)
    bundle, log = train(dataset, config)

    model_path = Path(args.model_out)
    model_path.parent.mkdir(parents=True, exist_ok=True)
    bundle.save(model_path)
    layout_path = model_path.with_name(model_path.stem + "_layout.json")
    bundle.layout.save(layout_path)

    log_path = model_path.with_name(model_path.stem + "_training_log.csv")
    with open(log_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("epoch,train_loss,val_accuracy,val_f1\n")
        for entry in log:
            f.write(
                f"{entry.epoch},{entry.train_loss!r},{entry.val_accuracy!r},{entry.val_f1!r}\n"
            )
    curves_path = model_path.with_name(model_path.stem + "_training_curves.png")
    if log:
        figures.training_curves(log, curves_path)

    _write_manifest(
        model_path.parent, "train", config.seed,
        config=asdict(config),
        inputs={"data": str(data_dir), "config_file": args.config},
        outputs={
            "model": str(model_path),
            "layout": str(layout_path),
            "training_log": str(log_path),
            "training_curves": str(curves_path) if log else None,
        },
        started=started,
    )
    print(f"wrote model to {model_path} ({len(log)} epochs logged)")
    return 0


def cmd_eval(args) -> int:
    started = time.time()
    from riskgraph import figures
    from riskgraph.data_model.io import load_cohort
    from riskgraph.model_io import ModelBundle
    from riskgraph.train_eval.pipeline import evaluate

    dataset = load_cohort(Path(args.data))
    bundle = ModelBundle.load(args.model)
    _check_layout_compat(bundle, dataset)
    report, cm = evaluate(bundle, dataset, args.split)

    out_dir = Path(args.model).resolve().parent / f"eval_{args.split}"
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.txt"
    metrics_path.write_text(report.to_text(), encoding="utf-8")
    confusion_path = out_dir / "confusion.csv"
    with open(confusion_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("actual\\predicted," + ",".join(map(str, range(cm.class_count))) + "\n")
        for cls, row in enumerate(cm.to_rows()):
            f.write(f"{cls}," + ",".join(map(str, row)) + "\n")
    figures.confusion_heatmap(cm.counts, out_dir / "confusion.png")

    print(report.to_text(), end="")
    print("confusion matrix (rows = actual):")
    for row in cm.to_rows():
        print("  " + " ".join(f"{v:6d}" for v in row))
    _write_manifest(
        out_dir, "eval", None,
        config={"split": args.split},
        inputs={"data": args.data, "model": args.model},
        outputs={"metrics": str(metrics_path), "confusion": str(confusion_path)},
        started=started,
    )
    return 0


def _check_layout_compat(bundle, dataset) -> None:
    """Models and cohorts must agree on the property layout's feature base."""
    from riskgraph.train_eval.pipeline import bundle_train_config, prepare_inputs

    config = bundle_train_config(bundle)
    try:
        prepare_inputs(dataset, bundle.layout, config)
    except (KeyError, FormatError) as exc:
        raise FormatError(
            f"model layout {bundle.layout.segment_names()} incompatible with cohort: {exc}"
        ) from exc


def cmd_infogain(args) -> int:
    started = time.time()
    from riskgraph import figures
    from riskgraph.data_model.io import load_cohort
    from riskgraph.train_eval.infogain import (
        discretize_feature,
        info_gain,
        property_gains,
        rank_categories,
    )

    dataset = load_cohort(Path(args.data))
    prop_rows = [(feat.name, gain) for feat, gain in property_gains(dataset)]
    cat_rows = rank_categories(dataset)

    if args.model:
        from riskgraph.model_io import ModelBundle
        from riskgraph.train_eval.pipeline import learned_post_dims

        bundle = ModelBundle.load(args.model)
        dims = learned_post_dims(bundle, dataset)
        labels = [u.label for u in dataset.users]
        learned = []
        for j in range(dims.shape[1]):
            classes = discretize_feature(dims[:, j], "mean_split")
            learned.append((f"post_dim_{j:02d}", info_gain(labels, classes)))
        learned.sort(key=lambda item: -item[1])
        prop_rows = sorted(prop_rows + learned, key=lambda item: -item[1])

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("scope,name,info_gain_bits\n")
        for name, gain in cat_rows:
            f.write(f"category,{name},{gain!r}\n")
        for name, gain in prop_rows:
            f.write(f"property,{name},{gain!r}\n")
    figure_path = out_path.with_suffix(".png")
    figures.infogain_bars(prop_rows, cat_rows, figure_path)

    print(f"top categories: {', '.join(f'{n} ({g:.3f})' for n, g in cat_rows[:3])}")
    _write_manifest(
        out_path.parent, "infogain", None,
        config={"model": args.model},
        inputs={"data": args.data},
        outputs={"csv": str(out_path), "figure": str(figure_path)},
        started=started,
    )
    return 0


def cmd_predict(args) -> int:
    from riskgraph.data_model.io import load_cohort
    from riskgraph.model_io import ModelBundle
    from riskgraph.attention_net import forward_user
    from riskgraph.train_eval.pipeline import bundle_train_config, encode_graph

    dataset = load_cohort(Path(args.data))
    if not dataset.has_user(args.user):
        raise LoadError(f"unknown user id {args.user!r}")
    bundle = ModelBundle.load(args.model)
    config = bundle_train_config(bundle)
    graph = encode_graph(bundle, dataset, config)
    trace = forward_user(graph, args.user, bundle.attn, config.net_config())

    print(f"user {args.user}: predicted class {trace.predicted_class}")
    for cls, prob in enumerate(trace.probs):
        print(f"  p(class {cls}) = {prob:.6f}")

    names = []
    for seg in bundle.layout.segments:
        if seg.width == 1:
            names.append(seg.name)
        else:
            names.extend(f"{seg.name}[{i}]" for i in range(seg.width))
    top = sorted(range(len(trace.alpha)), key=lambda i: -trace.alpha[i])[:5]
    print("top property attention:")
    for i in top:
        print(f"  {names[i]} = {trace.alpha[i]:.6f}")

    if trace.neighbour_ids:
        print("neighbour attention:")
        for nid, beta in zip(trace.neighbour_ids, trace.betas):
            print(f"  {nid} = {beta:.6f}")
    else:
        print("neighbour attention: no neighbours")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads and args.threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (LoadError, FormatError, IntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except RiskGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
