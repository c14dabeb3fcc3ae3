# nevae/training/aggressive.py

"""
Aggressive-encoder baseline.

Before every joint update the encoder alone is trained on fresh random
minibatches with the decoder frozen, until the inner objective stops
improving. The phase switches off for good once the mutual information
measured at the end of an epoch fails to increase.
"""

import logging
from typing import Optional

import numpy as np

from nevae.autodiff import AdamState, reset_adam_state
from nevae.data import Dataset
from nevae.losses import LossConfig
from nevae.metrics import mutual_information
from nevae.models import VAEModel
from nevae.training.steps import encoder_step

logger = logging.getLogger(__name__)


def aggressive_inner_loop(
    model: VAEModel,
    images: np.ndarray,
    loss_config: LossConfig,
    state: AdamState,
    batch_rng: np.random.Generator,
    noise_rng: np.random.Generator,
    epoch: int,
    batch_size: int,
    max_inner: int = 100,
    stop_window: int = 10,
    batch_index: int = 0,
) -> int:
    """
    Encoder-only updates; returns the number of inner steps taken.

    Stops when ``stop_window`` consecutive steps bring no improvement over the
    best inner loss seen so far, or after ``max_inner`` steps.
    """
    size = min(batch_size, images.shape[0])
    best = np.inf
    stale = 0
    steps = 0
    while steps < max_inner:
        batch = images[batch_rng.choice(images.shape[0], size=size, replace=False)]
        where = {"epoch": epoch, "batch": batch_index, "inner_step": steps}
        report = encoder_step(model, batch, loss_config, noise_rng, epoch, state, where)
        steps += 1
        if report.total < best:
            best = report.total
            stale = 0
        else:
            stale += 1
            if stale >= stop_window:
                break
    logger.debug(f"Aggressive inner loop: {steps} steps at epoch {epoch} batch {batch_index}, best {best:.4f}")
    return steps


class AggressiveSchedule:
    """Tracks whether the aggressive phase is still on and how much inner work it did."""

    def __init__(
        self,
        monitor: Dataset,
        max_inner: int,
        stop_window: int,
        reset_adam: bool,
        mi_seed: int,
        mi_max_items: int = 2048,
    ):
        self.monitor = monitor
        self.max_inner = max_inner
        self.stop_window = stop_window
        self.reset_adam = reset_adam
        self.mi_seed = mi_seed
        self.mi_max_items = mi_max_items
        self.active = True
        self.last_mi: Optional[float] = None
        self.switch_epoch: Optional[int] = None
        self._inner_steps = 0
        self._outer_steps = 0

    def before_joint_step(self, model, images, loss_config, state, batch_rng, noise_rng, epoch, batch_size, batch_index):
        if not self.active:
            return
        self._inner_steps += aggressive_inner_loop(
            model,
            images,
            loss_config,
            state,
            batch_rng,
            noise_rng,
            epoch,
            batch_size,
            max_inner=self.max_inner,
            stop_window=self.stop_window,
            batch_index=batch_index,
        )
        self._outer_steps += 1

    def end_epoch(self, model: VAEModel, epoch: int, state: AdamState) -> float:
        """Returns the mean inner-loop length of the epoch and applies the switch-off rule."""
        if not self.active:
            return 0.0
        mean_inner = self._inner_steps / max(self._outer_steps, 1)
        self._inner_steps = self._outer_steps = 0

        rng = np.random.default_rng(self.mi_seed)
        mi = mutual_information(model.encoder, self.monitor, 1, rng, max_items=self.mi_max_items)
        logger.info(f"Aggressive phase epoch {epoch + 1}: MI={mi:.4f}, mean inner steps {mean_inner:.1f}")
        if self.last_mi is not None and mi <= self.last_mi:
            self.active = False
            self.switch_epoch = epoch + 1
            logger.warning(
                f"Aggressive phase switched off after epoch {epoch + 1}: MI {mi:.4f} <= previous {self.last_mi:.4f}"
            )
            if self.reset_adam:
                reset_adam_state(state)
        self.last_mi = mi
        return mean_inner
