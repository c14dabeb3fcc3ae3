from nevae.autodiff.tensor import GradientTape, Tensor, active_tape, as_tensor, backward
from nevae.autodiff import ops
from nevae.autodiff.optim import adam_step, init_adam_state, reset_adam_state
from nevae.autodiff.types import AdamState

__all__ = [
    "AdamState",
    "GradientTape",
    "Tensor",
    "active_tape",
    "adam_step",
    "as_tensor",
    "backward",
    "init_adam_state",
    "ops",
    "reset_adam_state",
]
