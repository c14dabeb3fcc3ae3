# nevae/autodiff/optim.py

import logging
from typing import Optional, Sequence

import numpy as np

from nevae.autodiff.tensor import Tensor
from nevae.autodiff.types import AdamState
from nevae.errors import ShapeError

logger = logging.getLogger(__name__)


def init_adam_state(
    params: Sequence[Tensor],
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p.data) for p in params],
        v=[np.zeros_like(p.data) for p in params],
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def reset_adam_state(state: AdamState) -> None:
    """Zero the moments and the step counter, keeping hyperparameters."""
    for m, v in zip(state.m, state.v):
        m.fill(0.0)
        v.fill(0.0)
    state.step = 0


def adam_step(
    params: Sequence[Tensor],
    grads: Sequence[np.ndarray],
    state: AdamState,
    slots: Optional[Sequence[int]] = None,
) -> None:
    """
    Apply one bias-corrected Adam update in place.

    :param params: parameters to update.
    :param grads: gradients, one per parameter.
    :param state: optimizer state; ``state.step`` is incremented.
    :param slots: moment-buffer slot of each parameter; defaults to 0..len(params)-1.
        Lets a subset of a model (e.g. the encoder alone) share one optimizer.
    """
    slots = list(range(len(params))) if slots is None else list(slots)
    if len(grads) != len(params) or len(slots) != len(params):
        raise ShapeError("adam_step", (len(params),), (len(grads),), "parameter and gradient counts differ")
    for param, grad, slot in zip(params, grads, slots):
        if slot >= len(state.m):
            raise ShapeError("adam_step", (slot,), (len(state.m),), "slot outside optimizer state")
        if param.shape != np.shape(grad) or param.shape != state.m[slot].shape:
            raise ShapeError("adam_step", param.shape, np.shape(grad))

    state.step += 1
    bias1 = 1.0 - state.beta1 ** state.step
    bias2 = 1.0 - state.beta2 ** state.step
    for param, grad, slot in zip(params, grads, slots):
        m, v = state.m[slot], state.v[slot]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * (grad * grad)
        m_hat = m / bias1
        v_hat = v / bias2
        param.data -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
