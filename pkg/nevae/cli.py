# nevae/cli.py

import argparse
import hashlib
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import find_dotenv, load_dotenv
from pydantic import ValidationError

from nevae.data import (
    Dataset,
    SyntheticSpec,
    binarize,
    dataset_fingerprint,
    load_idx,
    make_synthetic,
    subsample_per_class,
    take_subset,
)
from nevae.errors import CheckpointError, ConfigError, DatasetError, IdxFormatError
from nevae.lso import LsoBenchmarkConfig, lso_benchmark, write_lso_csvs
from nevae.metrics import (
    EvalConfig,
    activity,
    append_metrics_csv,
    evaluate,
    posterior_params,
    write_activity_csv,
    write_report_json,
)
from nevae.models import VAEModel, load_checkpoint
from nevae.tools import RunManifest, make_run_id, prepare_run_dir, run_root, write_json, write_manifest
from nevae.training import TrainConfig, apply_overrides, load_run_config, train, write_run_log
from nevae.traverse import TraverseSpec, run_traverse, traverse_codes, zero_top_active

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


# --- Data sources ---

def _add_data_args(parser: argparse.ArgumentParser, required: bool = True) -> None:
    group = parser.add_argument_group("data")
    group.add_argument("--data", help="IDX image file (magic 0x803).")
    group.add_argument("--labels", help="Optional IDX label file (magic 0x801).")
    group.add_argument("--synthetic", type=int, metavar="K", help="Use synthetic data with K intrinsic factors instead of --data.")
    group.add_argument("--synthetic-n", type=int, default=10000)
    group.add_argument("--synthetic-dim", type=int, default=784)
    group.add_argument("--binarize", choices=("none", "threshold", "stochastic"), default="threshold")
    group.add_argument("--subset", type=int, help="Keep a deterministic random subset of N images.")
    group.add_argument("--per-class", type=int, help="Keep at most N images per label.")
    group.add_argument("--data-seed", type=int, default=0, help="Seed of synthetic data, subsets and stochastic binarization.")
    parser.set_defaults(data_required=required)


def _load_dataset(args) -> Optional[Dataset]:
    """Build the dataset named by the data flags; loading problems surface as ConfigError."""
    if args.data and args.synthetic is not None:
        raise ConfigError("--data and --synthetic are mutually exclusive")
    try:
        if args.synthetic is not None:
            dataset = make_synthetic(
                SyntheticSpec(
                    intrinsic_dim=args.synthetic,
                    ambient_dim=args.synthetic_dim,
                    n_samples=args.synthetic_n,
                    seed=args.data_seed,
                )
            )
        elif args.data:
            path = Path(args.data)
            if not path.is_file():
                raise FileNotFoundError(f"dataset not found: {path}")
            dataset = load_idx(path, args.labels)
        elif args.data_required:
            raise ConfigError("one of --data or --synthetic is required")
        else:
            return None

        if args.per_class:
            dataset = subsample_per_class(dataset, args.per_class, args.data_seed)
        if args.subset:
            dataset = take_subset(dataset, args.subset, args.data_seed)
        if args.binarize != "none":
            dataset = binarize(dataset, args.binarize, seed=args.data_seed)
    except (DatasetError, IdxFormatError) as e:
        raise ConfigError(f"could not load dataset: {e}") from e
    logger.info(f"Dataset: {dataset.n} images of {dataset.pixels} pixels")
    return dataset


def _data_snapshot(args) -> Dict[str, Any]:
    keys = ("data", "labels", "synthetic", "synthetic_n", "synthetic_dim", "binarize", "subset", "per_class", "data_seed")
    return {key: getattr(args, key) for key in keys}


def _load_model(path) -> VAEModel:
    try:
        return load_checkpoint(path)
    except CheckpointError as e:
        raise ConfigError(f"could not load checkpoint: {e}") from e


def _file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _output_dir(args, prefix: str, snapshot: Dict[str, Any], fingerprint: str, checkpoints: bool = False) -> tuple:
    run_id = make_run_id(prefix, snapshot, fingerprint)
    if args.out:
        out = Path(args.out)
        (out / "checkpoints" if checkpoints else out).mkdir(parents=True, exist_ok=True)
        return run_id, out
    return run_id, prepare_run_dir(run_root(args.run_dir), run_id, checkpoints=checkpoints)


# --- Subcommands ---

def _train_overrides(args) -> Dict[str, Any]:
    flags = {
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "lr": args.lr,
        "seed": args.seed,
        "model.n_z": args.nz,
        "model.encoder_hidden": args.hidden,
        "model.decoder_hidden": args.hidden,
        "model.hidden_activation": args.activation,
        "model.zero_init_encoder_head": True if args.zero_init_head else None,
        "loss.variant": args.variant,
        "loss.beta": args.beta,
        "loss.cap_c": args.cap,
        "loss.ne_weight": args.ne_weight,
        "loss.anneal": "none" if args.no_anneal else args.anneal,
        "loss.binarize_reencode": True if args.binarize_reencode else None,
        "aggressive": True if args.aggressive else None,
        "aggressive_max_inner": args.max_inner,
        "aggressive_stop_window": args.stop_window,
        "reset_adam_after_aggressive": True if args.reset_adam else None,
        "eval_every": args.eval_every,
        "eval_max_items": args.eval_max_items,
        "checkpoint_every": args.checkpoint_every,
        "progress": True if args.progress else None,
    }
    return {key: value for key, value in flags.items() if value is not None}


def cmd_train(args) -> Path:
    overrides = _train_overrides(args)
    if args.config:
        config = load_run_config(args.config, overrides)
    else:
        config = apply_overrides(TrainConfig(), overrides)

    dataset = _load_dataset(args)
    fingerprint = dataset_fingerprint(dataset)
    snapshot = {"train": config.model_dump(mode="json"), "data": _data_snapshot(args)}
    run_id, run_dir = _output_dir(
        args, args.name or f"train_{config.loss.variant}", snapshot, fingerprint, checkpoints=True
    )

    artifacts = {
        "checkpoint": "checkpoints/final.ckpt",
        "runlog": "runlog.json",
        "losses": "losses.csv",
        "reencode": "reencode.csv",
        "metrics": "metrics.csv",
        "activity": "activity.csv",
    }
    manifest = RunManifest(
        run_id=run_id,
        command="train",
        config=snapshot,
        dataset_fingerprint=fingerprint,
        seed=config.seed,
        artifacts=artifacts,
    )
    write_manifest(run_dir, manifest)

    _, log = train(dataset, config, run_dir=run_dir, run_id=run_id)
    write_run_log(run_dir, log)
    logger.info(f"Training run {run_id} complete: {run_dir}")
    return run_dir


def cmd_eval(args) -> Path:
    model = _load_model(args.checkpoint)
    dataset = _load_dataset(args)
    overrides = {
        "seed": args.seed,
        "batch_size": args.batch_size,
        "max_items": args.max_items,
        "mi_samples": args.mi_samples,
        "mi_max_items": args.mi_max_items,
        "mi_estimator": args.mi_estimator,
    }
    config = EvalConfig(**{key: value for key, value in overrides.items() if value is not None})

    fingerprint = dataset_fingerprint(dataset)
    snapshot = {
        "eval": config.model_dump(mode="json"),
        "checkpoint_sha256": _file_digest(args.checkpoint),
        "data": _data_snapshot(args),
    }
    run_id, out = _output_dir(args, "eval", snapshot, fingerprint)
    artifacts = {"report": "report.json", "metrics": "metrics.csv"}
    if args.activity_csv:
        artifacts["activity"] = "activity.csv"
    write_manifest(
        out,
        RunManifest(run_id=run_id, command="eval", config=snapshot, dataset_fingerprint=fingerprint, seed=config.seed, artifacts=artifacts),
    )

    report = evaluate(model, dataset, config)
    write_report_json(out / "report.json", report)
    metrics_path = out / "metrics.csv"
    metrics_path.unlink(missing_ok=True)
    append_metrics_csv(metrics_path, run_id, None, report)
    if args.activity_csv:
        write_activity_csv(out / "activity.csv", run_id, None, report)
    logger.info(f"Evaluation written to {out}")
    return out


def cmd_traverse(args) -> Path:
    model = _load_model(args.checkpoint)
    dataset = _load_dataset(args)
    if args.random and args.dim is not None:
        raise ConfigError("--dim and --random are mutually exclusive")

    zero_dims: List[int] = [int(d) for d in args.zero_dims.split(",") if d.strip()] if args.zero_dims else []
    if args.zero_top:
        if dataset is None:
            raise ConfigError("--zero-top needs --data or --synthetic to rank dimensions by activity")
        mus, _ = posterior_params(model.encoder, dataset.images)
        zero_dims = sorted(set(zero_dims) | set(zero_top_active(activity(mus), args.zero_top)))
        logger.info(f"Zeroing the {args.zero_top} most active dimensions: {zero_dims}")

    spec = TraverseSpec(
        kind="random_direction" if args.random else "single_dim",
        dim=args.dim or 0,
        n_points=args.points,
        lo=args.lo,
        hi=args.hi,
        radius=args.radius,
        zero_dims=zero_dims,
        seed=args.seed,
        cols=args.cols,
    )
    fingerprint = dataset_fingerprint(dataset) if dataset is not None else ""
    snapshot = {"traverse": spec.model_dump(mode="json"), "checkpoint_sha256": _file_digest(args.checkpoint)}
    run_id, out = _output_dir(args, "traverse", snapshot, fingerprint)
    write_manifest(
        out,
        RunManifest(
            run_id=run_id,
            command="traverse",
            config=snapshot,
            dataset_fingerprint=fingerprint,
            seed=spec.seed,
            artifacts={"grid": spec.filename(), "index": spec.filename().replace(".pgm", ".json")},
        ),
    )
    run_traverse(spec, model.decoder, out, traverse_codes(spec, model.n_z))
    return out


def cmd_lso(args) -> Path:
    ids = args.model_id or []
    if ids and len(ids) != len(args.checkpoint):
        raise ConfigError("--model-id must be given once per --checkpoint")
    models = {}
    for index, path in enumerate(args.checkpoint):
        model_id = ids[index] if ids else Path(path).stem
        if model_id in models:
            raise ConfigError(f"duplicate model id {model_id!r}; name models with --model-id")
        models[model_id] = _load_model(path)

    dataset = _load_dataset(args)
    overrides = {
        "n_targets": args.targets,
        "thresholds": args.thresholds,
        "n_random_inits": args.inits,
        "include_encoder_mean": False if args.no_encoder_init else None,
        "stop_window": args.stop_window,
        "max_iters": args.max_iters,
        "lr": args.lr,
        "seed": args.seed,
        "workers": args.workers,
    }
    config = LsoBenchmarkConfig(**{key: value for key, value in overrides.items() if value is not None})

    fingerprint = dataset_fingerprint(dataset)
    snapshot = {
        "lso": config.model_dump(mode="json", exclude={"workers"}),
        "models": {model_id: _file_digest(path) for model_id, path in zip(models, args.checkpoint)},
        "data": _data_snapshot(args),
    }
    run_id, out = _output_dir(args, "lso", snapshot, fingerprint)
    write_manifest(
        out,
        RunManifest(
            run_id=run_id,
            command="lso",
            config=snapshot,
            dataset_fingerprint=fingerprint,
            seed=config.seed,
            artifacts={"trials": "lso_trials.csv", "pairs": "lso_pairs.csv", "summary": "lso_summary.csv", "targets": "lso_targets.json"},
        ),
    )

    report = lso_benchmark(dataset, models, config)
    write_lso_csvs(out, report)
    write_json(out / "lso_targets.json", {"target_ids": report.target_ids, "skipped": report.skipped})
    return out


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nevae", description="Re-encoding regularized VAEs and posterior-collapse diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def outputs(p):
        p.add_argument("--run-dir", help="Output root (default: $NEVAE_RUN_DIR or ./runs).")
        p.add_argument("--out", help="Write artifacts to this directory instead of a run directory.")

    p = sub.add_parser("train", help="Train a VAE variant.")
    p.add_argument("--config", help="Flat key-value run config; flags override its values.")
    p.add_argument("--variant", choices=("vanilla", "beta", "ne_se", "ne_lp"))
    p.add_argument("--nz", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--cap", type=float, help="Cap c of the ne_lp loss.")
    p.add_argument("--ne-weight", type=float)
    p.add_argument("--anneal", help="KL annealing as start,end,epochs.")
    p.add_argument("--no-anneal", action="store_true")
    p.add_argument("--hidden", help="Hidden widths of both networks, e.g. 512,512.")
    p.add_argument("--activation", choices=("tanh", "relu", "sigmoid", "linear"))
    p.add_argument("--zero-init-head", action="store_true")
    p.add_argument("--binarize-reencode", action="store_true")
    p.add_argument("--aggressive", action="store_true")
    p.add_argument("--max-inner", type=int)
    p.add_argument("--stop-window", type=int)
    p.add_argument("--reset-adam", action="store_true")
    p.add_argument("--eval-every", type=int)
    p.add_argument("--eval-max-items", type=int)
    p.add_argument("--checkpoint-every", type=int)
    p.add_argument("--progress", action="store_true")
    p.add_argument("--name", help="Run id prefix (default train_<variant>).")
    outputs(p)
    _add_data_args(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="Compute diagnostics of a checkpoint.")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--max-items", type=int)
    p.add_argument("--mi-samples", type=int)
    p.add_argument("--mi-max-items", type=int)
    p.add_argument("--mi-estimator", choices=("control_variate", "direct"))
    p.add_argument("--activity-csv", action="store_true", help="Also write per-dimension activity.")
    outputs(p)
    _add_data_args(p)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("traverse", help="Render latent traverses of a checkpoint.")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--random", action="store_true", help="Random direction at fixed radius.")
    p.add_argument("--zero-dims", help="Comma-separated dimensions held at 0.")
    p.add_argument("--zero-top", type=int, help="Hold the K most active dimensions at 0.")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--lo", type=float, default=-10.0)
    p.add_argument("--hi", type=float, default=10.0)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cols", type=int)
    outputs(p)
    _add_data_args(p, required=False)
    p.set_defaults(handler=cmd_traverse)

    p = sub.add_parser("lso", help="Latent space optimization benchmark.")
    p.add_argument("--checkpoint", required=True, action="append", help="Repeat once per model.")
    p.add_argument("--model-id", action="append")
    p.add_argument("--targets", type=int)
    p.add_argument("--thresholds", help="Comma-separated stopping thresholds.")
    p.add_argument("--inits", type=int, help="Random prior initializations per target.")
    p.add_argument("--no-encoder-init", action="store_true")
    p.add_argument("--stop-window", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    outputs(p)
    _add_data_args(p)
    p.set_defaults(handler=cmd_lso)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(find_dotenv(".env", usecwd=True))
    logging.basicConfig(
        level=os.getenv("LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        out = args.handler(args)
    except (ConfigError, ValidationError, FileNotFoundError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except Exception:
        logger.exception(f"{args.command} failed")
        return EXIT_RUNTIME
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
