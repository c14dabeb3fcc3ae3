# nevae/training/steps.py

import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from nevae.autodiff import AdamState, GradientTape, adam_step, backward
from nevae.errors import DomainError, NonFiniteLossError
from nevae.losses import LossConfig, LossReport, loss_graph
from nevae.models import VAEModel, save_checkpoint

logger = logging.getLogger(__name__)


class SeedStreams:
    """Independent generators derived from one training seed."""

    def __init__(self, seed: int):
        init, shuffle, noise, inner, monitor = np.random.SeedSequence(seed).spawn(5)
        self.init_seed = int(init.generate_state(1)[0])
        self.shuffle = np.random.default_rng(shuffle)
        self.noise = np.random.default_rng(noise)
        self.inner = np.random.default_rng(inner)
        self.monitor_seed = int(monitor.generate_state(1)[0])


def compute_gradients(
    model: VAEModel,
    batch: np.ndarray,
    loss_config: LossConfig,
    rng: np.random.Generator,
    epoch: Optional[int],
    where: dict,
) -> Tuple[LossReport, list]:
    """Loss report and one gradient per model parameter (encoder first)."""
    params = model.parameters()
    terms = {"recon_nll": float("nan"), "kl": float("nan"), "ne_term": float("nan")}
    try:
        with GradientTape() as tape:
            tape.watch(*params)
            total, report = loss_graph(batch, model, loss_config, rng, epoch, terms)
            backward(total, tape)
    except DomainError as e:
        raise NonFiniteLossError(f"loss graph produced a non-finite value: {e}", **where, **terms) from e

    grads = [p.grad for p in params]
    if not all(np.all(np.isfinite(g)) for g in grads):
        raise NonFiniteLossError(
            "non-finite gradient",
            **where,
            recon_nll=report.recon_nll,
            kl=report.kl,
            ne_term=report.ne_term,
        )
    return report, grads


def apply_update(
    params: Sequence,
    grads: Sequence[np.ndarray],
    state: AdamState,
    slots: Optional[Sequence[int]] = None,
) -> None:
    adam_step(params, grads, state, slots=slots)
    for p in params:
        p.zero_grad()


def joint_step(
    model: VAEModel,
    batch: np.ndarray,
    loss_config: LossConfig,
    rng: np.random.Generator,
    epoch: int,
    state: AdamState,
    where: dict,
) -> LossReport:
    report, grads = compute_gradients(model, batch, loss_config, rng, epoch, where)
    apply_update(model.parameters(), grads, state)
    return report


def encoder_step(
    model: VAEModel,
    batch: np.ndarray,
    loss_config: LossConfig,
    rng: np.random.Generator,
    epoch: int,
    state: AdamState,
    where: dict,
) -> LossReport:
    """Update the encoder alone; the decoder's parameters and Adam slots are left untouched."""
    report, grads = compute_gradients(model, batch, loss_config, rng, epoch, where)
    n_enc = len(model.encoder.parameters())
    apply_update(model.encoder.parameters(), grads[:n_enc], state, slots=model.encoder_slots())
    for p in model.decoder.parameters():
        p.zero_grad()
    return report


def batch_slices(n: int, batch_size: int):
    for start in range(0, n, batch_size):
        yield slice(start, min(start + batch_size, n))


def checkpoint_path(run_dir: Path, epoch: Optional[int] = None) -> Path:
    name = "final.ckpt" if epoch is None else f"epoch_{epoch:03d}.ckpt"
    return Path(run_dir) / "checkpoints" / name


def write_checkpoint(run_dir: Optional[Path], model: VAEModel, epoch: Optional[int] = None) -> Optional[Path]:
    if run_dir is None:
        return None
    return save_checkpoint(checkpoint_path(run_dir, epoch), model)
