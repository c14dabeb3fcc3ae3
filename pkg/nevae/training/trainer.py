# nevae/training/trainer.py

import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from nevae.autodiff import init_adam_state
from nevae.data import Dataset, take_subset
from nevae.errors import DomainError, NonFiniteLossError
from nevae.losses import kl_weight_for
from nevae.metrics import evaluate, reencode_error
from nevae.models import VAEModel, init_model
from nevae.training.aggressive import AggressiveSchedule
from nevae.training.steps import SeedStreams, batch_slices, joint_step, write_checkpoint
from nevae.training.types import EpochRecord, RunLog, TrainConfig

logger = logging.getLogger(__name__)


def train(
    dataset: Dataset,
    config: TrainConfig,
    run_dir: Optional[Path] = None,
    run_id: str = "",
) -> Tuple[VAEModel, RunLog]:
    """
    Train a VAE under ``config``; deterministic given ``config.seed``.

    With ``run_dir`` set, checkpoints go to ``run_dir/checkpoints``.
    ``config.aggressive`` routes to the aggressive-encoder baseline.
    """
    if config.aggressive:
        return train_aggressive(dataset, config, run_dir, run_id)
    return _fit(dataset, config, run_dir, run_id, schedule_factory=None)


def train_aggressive(
    dataset: Dataset,
    config: TrainConfig,
    run_dir: Optional[Path] = None,
    run_id: str = "",
) -> Tuple[VAEModel, RunLog]:
    if not config.aggressive:
        config = config.model_copy(update={"aggressive": True})

    def factory(monitor: Dataset, streams: SeedStreams) -> AggressiveSchedule:
        return AggressiveSchedule(
            monitor,
            max_inner=config.aggressive_max_inner,
            stop_window=config.aggressive_stop_window,
            reset_adam=config.reset_adam_after_aggressive,
            mi_seed=streams.monitor_seed,
            mi_max_items=config.eval.mi_max_items,
        )

    return _fit(dataset, config, run_dir, run_id, schedule_factory=factory)


def _fit(dataset, config: TrainConfig, run_dir, run_id, schedule_factory) -> Tuple[VAEModel, RunLog]:
    streams = SeedStreams(config.seed)
    model = init_model(config.model, dataset.pixels, streams.init_seed)
    log = RunLog(run_id=run_id, config=config)
    if config.epochs == 0:
        logger.info("Zero-epoch schedule, returning the initial model")
        write_checkpoint(run_dir, model)
        return model, log

    monitor = take_subset(dataset, config.eval_max_items, config.eval.seed)
    eval_config = config.eval.model_copy(update={"max_items": None})
    schedule = schedule_factory(monitor, streams) if schedule_factory else None

    params = model.parameters()
    state = init_adam_state(params, lr=config.lr)
    images = dataset.images
    logger.info(
        f"Training {config.loss.variant} on {dataset.n} items: n_z={config.model.n_z}, epochs={config.epochs}, "
        f"batch_size={config.batch_size}, lr={config.lr}, seed={config.seed}, aggressive={config.aggressive}"
    )

    for epoch in tqdm(range(config.epochs), desc="epochs", disable=not config.progress):
        order = streams.shuffle.permutation(dataset.n)
        sums = np.zeros(4)
        n_batches = 0
        aggressive_now = schedule is not None and schedule.active
        for batch_index, rows in enumerate(batch_slices(dataset.n, config.batch_size)):
            batch = images[order[rows]]
            if schedule is not None:
                schedule.before_joint_step(
                    model, images, config.loss, state, streams.inner, streams.noise,
                    epoch, config.batch_size, batch_index,
                )
            where = {"epoch": epoch, "batch": batch_index}
            report = joint_step(model, batch, config.loss, streams.noise, epoch, state, where)
            sums += (report.recon_nll, report.kl, report.ne_term, report.total)
            n_batches += 1
            logger.debug(f"epoch {epoch} batch {batch_index}: total={report.total:.4f} kl={report.kl:.4f}")

        recon, kl, ne, total = sums / n_batches
        last = epoch + 1 == config.epochs
        evaluate_now = last or bool(config.eval_every and (epoch + 1) % config.eval_every == 0)
        try:
            mean_inner = schedule.end_epoch(model, epoch, state) if schedule is not None else 0.0
            se = reencode_error(model, monitor, np.random.default_rng(streams.monitor_seed))
            diagnostics = evaluate(model.clone(), monitor, eval_config) if evaluate_now else None
        except DomainError as e:
            raise NonFiniteLossError(
                f"end-of-epoch diagnostics produced a non-finite value: {e}",
                epoch=epoch,
                batch=None,
                recon_nll=recon,
                kl=kl,
                ne_term=ne,
            ) from e

        record = EpochRecord(
            epoch=epoch + 1,
            kl_weight=kl_weight_for(config.loss, epoch),
            recon_nll=recon,
            kl=kl,
            ne_term=ne,
            total=total,
            reencode_se=se,
            aggressive=aggressive_now,
            mean_inner_steps=mean_inner,
            diagnostics=diagnostics,
        )
        log.epochs.append(record)
        logger.info(
            f"Epoch {epoch + 1}/{config.epochs}: loss={total:.4f} recon={recon:.4f} kl={kl:.4f} "
            f"ne={ne:.4f} reencode_se={se:.4f}"
            + (f" MI={diagnostics.mi:.4f} AU={diagnostics.au_count}" if diagnostics else "")
        )

        if config.checkpoint_every and (epoch + 1) % config.checkpoint_every == 0:
            write_checkpoint(run_dir, model, epoch + 1)

    if schedule is not None:
        log.aggressive_switch_epoch = schedule.switch_epoch
    write_checkpoint(run_dir, model)
    logger.info(f"Finished training after {config.epochs} epochs")
    return model, log
