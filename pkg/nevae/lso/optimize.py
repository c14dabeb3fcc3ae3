# nevae/lso/optimize.py

import logging
from typing import Dict, List, Sequence

import numpy as np

from nevae.autodiff import GradientTape, Tensor, backward, init_adam_state, adam_step, ops
from nevae.errors import DomainError, NonFiniteLossError
from nevae.lso.types import FrozenDecoder, LsoConfig, LsoTrace, as_code
from nevae.models import DecoderParams

logger = logging.getLogger(__name__)


def freeze(decoder: FrozenDecoder) -> FrozenDecoder:
    """
    A view of ``decoder`` whose parameters never require a gradient.

    The view shares the parameter buffers; nothing writes to them.
    """
    if isinstance(decoder, DecoderParams):
        return DecoderParams(
            weights=[Tensor(w.data) for w in decoder.weights],
            biases=[Tensor(b.data) for b in decoder.biases],
            activations=list(decoder.activations),
        )
    return _FrozenView(decoder)


class _FrozenView:
    """Read-only wrapper for decoders other than ``DecoderParams``."""

    def __init__(self, decoder: FrozenDecoder):
        self._decoder = decoder

    def mean(self, z: Tensor) -> Tensor:
        return self._decoder.mean(z)

    def parameters(self) -> List[Tensor]:
        return [p.detach() for p in self._decoder.parameters()]


def _squared_error(decoder: FrozenDecoder, z: Tensor, target: np.ndarray, where: dict):
    try:
        # only z is a leaf, so decoder tensors keep grad=None whatever their requires_grad
        with GradientTape(watch_accessed_variables=False) as tape:
            tape.watch(z)
            loss = ops.sum(ops.square(ops.sub(decoder.mean(z), target)))
            backward(loss, tape)
    except DomainError as e:
        raise NonFiniteLossError(f"LSO loss became non-finite: {e}", **where) from e
    value = float(loss.data)
    if not np.isfinite(value) or not np.all(np.isfinite(z.grad)):
        raise NonFiniteLossError("LSO loss became non-finite", **where)
    return value, z.grad


def lso_trajectory(
    target,
    decoder: FrozenDecoder,
    init_code,
    thresholds: Sequence[float],
    stop_window: int = 10,
    max_iters: int = 50000,
    lr: float = 1e-3,
    target_id: int = 0,
    init_kind: str = "random_prior",
) -> Dict[float, LsoTrace]:
    """
    Minimize sum((target - decoder.mean(z))**2) over z with Adam.

    A step is stalled when the loss changed by less than the threshold in
    either direction; a threshold stops after ``stop_window`` consecutive
    stalls, so threshold 0 always runs to ``max_iters``.
    One trajectory runs until every threshold has stopped or ``max_iters``
    steps were taken; each threshold reads its trace off that trajectory.
    """
    decoder = freeze(decoder)
    target = as_code(target)[None, :]
    initial = as_code(init_code)
    z = Tensor(initial[None, :].copy(), requires_grad=True, name="z")
    state = init_adam_state([z], lr=lr)

    loss, grad = _squared_error(decoder, z, target, {"target_id": target_id, "iteration": 0})
    curve = [loss]
    streaks = {t: 0 for t in thresholds}
    stops: Dict[float, tuple] = {}
    iteration = 0
    while len(stops) < len(streaks) and iteration < max_iters:
        adam_step([z], [grad], state)
        iteration += 1
        loss, grad = _squared_error(decoder, z, target, {"target_id": target_id, "iteration": iteration})
        change = loss - curve[-1]
        curve.append(loss)
        for threshold in streaks:
            if threshold in stops:
                continue
            stalled = abs(change) < threshold
            streaks[threshold] = streaks[threshold] + 1 if stalled else 0
            if streaks[threshold] >= stop_window:
                stops[threshold] = (iteration, z.data[0].copy(), True)

    traces = {}
    for threshold in thresholds:
        steps, code, stopped = stops.get(threshold, (iteration, z.data[0].copy(), False))
        traces[threshold] = LsoTrace(
            target_id=target_id,
            init_kind=init_kind,
            threshold=threshold,
            iterations=steps,
            stopped=stopped,
            loss_curve=curve[: steps + 1],
            initial_code=initial.copy(),
            final_code=code,
            final_loss=curve[steps],
            best_loss=min(curve[: steps + 1]),
        )
        logger.debug(
            f"LSO target {target_id} ({init_kind}) threshold {threshold:g}: "
            f"{'stopped' if stopped else 'hit max_iters'} after {steps} steps, loss {curve[steps]:.6g}"
        )
    return traces


def lso_optimize(target, decoder: FrozenDecoder, config: LsoConfig, init_code, target_id: int = 0) -> LsoTrace:
    traces = lso_trajectory(
        target,
        decoder,
        init_code,
        [config.stop_threshold],
        stop_window=config.stop_window,
        max_iters=config.max_iters,
        lr=config.lr,
        target_id=target_id,
        init_kind=config.init,
    )
    return traces[config.stop_threshold]
