# nevae/lso/benchmark.py

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

import numpy as np

from nevae.data import Dataset
from nevae.errors import IncompatibleModelsError, NonFiniteLossError
from nevae.lso.optimize import freeze, lso_trajectory
from nevae.lso.types import LsoBenchmarkConfig, LsoPairRow, LsoReport, LsoSummaryRow, LsoTrace, LsoTrialRow
from nevae.models import VAEModel, mlp_forward
from nevae.tools import write_csv

logger = logging.getLogger(__name__)

TRIALS_HEADER = ("model_id", "target_id", "init_kind", "threshold", "iterations", "final_loss", "stopped", "best_loss", "initial_loss")
PAIRS_HEADER = ("model_id", "threshold", "target_id", "init_a", "init_b", "sq_distance")
SUMMARY_HEADER = (
    "model_id", "threshold", "init_kind", "n_trials", "mean_iterations", "median_iterations",
    "mean_final_loss", "final_loss_spread", "mean_pairwise_distance",
)


def select_targets(dataset: Dataset, n_targets: int, seed: int) -> List[int]:
    if n_targets >= dataset.n:
        return list(range(dataset.n))
    rng = np.random.default_rng(seed)
    return sorted(int(i) for i in rng.choice(dataset.n, size=n_targets, replace=False))


def check_compatible(dataset: Dataset, models: Mapping[str, VAEModel]) -> None:
    if not models:
        raise IncompatibleModelsError("no models to benchmark")
    shapes = {model_id: (m.n_z, m.pixels) for model_id, m in models.items()}
    if len(set(shapes.values())) != 1:
        raise IncompatibleModelsError(f"models disagree on (n_z, pixels): {shapes}")
    pixels = next(iter(shapes.values()))[1]
    if pixels != dataset.pixels:
        raise IncompatibleModelsError(f"models emit {pixels} pixels, dataset has {dataset.pixels}")


def random_inits(seed: int, target_id: int, n_inits: int, n_z: int) -> np.ndarray:
    """Prior draws for one target; identical across models sharing n_z."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, target_id]))
    return rng.standard_normal((n_inits, n_z))


def encoder_mean(model: VAEModel, image: np.ndarray) -> np.ndarray:
    return mlp_forward(model.encoder, image[None, :]).data[0, : model.n_z]


def pairwise_sq_distances(codes: Mapping[str, np.ndarray]) -> List[tuple]:
    """(kind_a, kind_b, ||a - b||^2) for every unordered pair of initializations."""
    return [
        (a, b, float(np.sum((codes[a] - codes[b]) ** 2)))
        for a, b in itertools.combinations(sorted(codes), 2)
    ]


def _run_target(model: VAEModel, decoder, dataset: Dataset, target_id: int, config: LsoBenchmarkConfig):
    image = dataset.images[target_id]
    inits: Dict[str, np.ndarray] = {
        f"random_prior_{i}": code
        for i, code in enumerate(random_inits(config.seed, target_id, config.n_random_inits, model.n_z))
    }
    if config.include_encoder_mean:
        inits["encoder_mean"] = encoder_mean(model, image)

    results: Dict[str, Dict[float, LsoTrace]] = {}
    skipped: List[str] = []
    for kind, code in inits.items():
        try:
            results[kind] = lso_trajectory(
                image,
                decoder,
                code,
                config.thresholds,
                stop_window=config.stop_window,
                max_iters=config.max_iters,
                lr=config.lr,
                target_id=target_id,
                init_kind=kind,
            )
        except NonFiniteLossError as e:
            logger.warning(f"Skipping LSO trial target={target_id} init={kind}: {e}")
            skipped.append(f"{target_id}:{kind}")
    return results, skipped


def _group(kind: str) -> str:
    return "encoder_mean" if kind == "encoder_mean" else "random_prior"


def _summarize(model_id: str, threshold: float, group: str, traces: Dict[int, Dict[str, LsoTrace]]) -> Optional[LsoSummaryRow]:
    per_target = {
        target_id: {kind: t for kind, t in by_kind.items() if group == "all" or _group(kind) == group}
        for target_id, by_kind in traces.items()
    }
    flat = [t for by_kind in per_target.values() for t in by_kind.values()]
    if not flat:
        return None
    iterations = np.array([t.iterations for t in flat], dtype=np.float64)
    spreads = [
        max(t.final_loss for t in by_kind.values()) - min(t.final_loss for t in by_kind.values())
        for by_kind in per_target.values()
        if len(by_kind) >= 2
    ]
    distances = [
        d
        for by_kind in per_target.values()
        for _, _, d in pairwise_sq_distances({kind: t.final_code for kind, t in by_kind.items()})
    ]
    return LsoSummaryRow(
        model_id=model_id,
        threshold=threshold,
        init_kind=group,
        n_trials=len(flat),
        mean_iterations=float(iterations.mean()),
        median_iterations=float(np.median(iterations)),
        mean_final_loss=float(np.mean([t.final_loss for t in flat])),
        final_loss_spread=float(np.mean(spreads)) if spreads else None,
        mean_pairwise_distance=float(np.mean(distances)) if distances else None,
    )


def lso_benchmark(dataset: Dataset, models: Mapping[str, VAEModel], config: LsoBenchmarkConfig) -> LsoReport:
    """
    Run every (model, target, init) trajectory and tabulate stopping behavior per threshold.

    All models see the same targets and the same prior initializations.
    """
    check_compatible(dataset, models)
    target_ids = select_targets(dataset, config.n_targets, config.seed)
    report = LsoReport(target_ids=target_ids)

    for model_id, model in models.items():
        decoder = freeze(model.decoder)
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(lambda t: _run_target(model, decoder, dataset, t, config), target_ids))

        by_threshold: Dict[float, Dict[int, Dict[str, LsoTrace]]] = {t: {} for t in config.thresholds}
        for target_id, (results, skipped) in zip(target_ids, outcomes):
            report.skipped.extend(f"{model_id}:{s}" for s in skipped)
            for kind, traces in results.items():
                for threshold, trace in traces.items():
                    by_threshold[threshold].setdefault(target_id, {})[kind] = trace
                    report.trials.append(
                        LsoTrialRow(
                            model_id=model_id,
                            target_id=target_id,
                            init_kind=kind,
                            threshold=threshold,
                            iterations=trace.iterations,
                            stopped=trace.stopped,
                            initial_loss=trace.initial_loss,
                            final_loss=trace.final_loss,
                            best_loss=trace.best_loss,
                        )
                    )

        for threshold in config.thresholds:
            traces = by_threshold[threshold]
            for target_id, by_kind in traces.items():
                codes = {kind: t.final_code for kind, t in by_kind.items()}
                for a, b, d in pairwise_sq_distances(codes):
                    report.pairs.append(
                        LsoPairRow(model_id=model_id, threshold=threshold, target_id=target_id, init_a=a, init_b=b, sq_distance=d)
                    )
            for group in ("random_prior", "encoder_mean", "all"):
                row = _summarize(model_id, threshold, group, traces)
                if row is not None:
                    report.summary.append(row)

        for threshold in config.thresholds:
            row = report.summary_for(model_id, threshold)
            if row is not None:
                logger.info(
                    f"LSO {model_id} threshold {threshold:g}: mean iterations {row.mean_iterations:.1f}, "
                    f"mean final loss {row.mean_final_loss:.4f}, pairwise distance {row.mean_pairwise_distance}"
                )
    return report


def _blank(value):
    return "" if value is None else value


def write_lso_csvs(out_dir: Union[str, Path], report: LsoReport) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    trials = write_csv(
        out_dir / "lso_trials.csv",
        TRIALS_HEADER,
        [
            (r.model_id, r.target_id, r.init_kind, r.threshold, r.iterations, r.final_loss, r.stopped, r.best_loss, r.initial_loss)
            for r in report.trials
        ],
    )
    pairs = write_csv(
        out_dir / "lso_pairs.csv",
        PAIRS_HEADER,
        [(r.model_id, r.threshold, r.target_id, r.init_a, r.init_b, r.sq_distance) for r in report.pairs],
    )
    summary = write_csv(
        out_dir / "lso_summary.csv",
        SUMMARY_HEADER,
        [
            (
                r.model_id, r.threshold, r.init_kind, r.n_trials, r.mean_iterations, r.median_iterations,
                r.mean_final_loss, _blank(r.final_loss_spread), _blank(r.mean_pairwise_distance),
            )
            for r in report.summary
        ],
    )
    return {"trials": trials, "pairs": pairs, "summary": summary}
