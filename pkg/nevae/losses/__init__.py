from nevae.losses.objectives import (
    anneal_weight,
    bernoulli_nll,
    gaussian_nll,
    kl_diag_gauss_to_std,
    kl_weight_for,
    loss_graph,
    ne_lp,
    ne_se,
    total_loss,
)
from nevae.losses.types import AnnealSchedule, LossConfig, LossReport

__all__ = [
    "AnnealSchedule",
    "LossConfig",
    "LossReport",
    "anneal_weight",
    "bernoulli_nll",
    "gaussian_nll",
    "kl_diag_gauss_to_std",
    "kl_weight_for",
    "loss_graph",
    "ne_lp",
    "ne_se",
    "total_loss",
]
