# nevae/losses/objectives.py

import logging
import math
from typing import Optional, Tuple

import numpy as np

from nevae.autodiff import Tensor, as_tensor, ops
from nevae.errors import ShapeError
from nevae.losses.types import AnnealSchedule, LossConfig, LossReport
from nevae.models import VAEModel, decode, encode, reencode

logger = logging.getLogger(__name__)

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
# Floor on the re-encoded variance inside ne_lp.
LOG_VAR_FLOOR = math.log(1e-8)


def _same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(op, a.shape, b.shape)


def kl_diag_gauss_to_std(mu, log_var) -> Tensor:
    """Elementwise KL(N(mu, exp(log_var)) || N(0, 1)) as a [batch, n_z] tensor."""
    mu, log_var = as_tensor(mu), as_tensor(log_var)
    _same_shape("kl_diag_gauss_to_std", mu, log_var)
    inner = ops.sub(ops.sub(ops.add(ops.square(mu), ops.exp(log_var)), 1.0), log_var)
    return ops.mul(inner, 0.5)


def bernoulli_nll(logits, x) -> Tensor:
    """-[x log s(l) + (1 - x) log(1 - s(l))] == softplus(l) - x * l."""
    logits, x = as_tensor(logits), as_tensor(x)
    _same_shape("bernoulli_nll", logits, x)
    return ops.sub(ops.softplus(logits), ops.mul(x, logits))


def ne_se(z, z_hat) -> Tensor:
    """Squared error between a code and its re-encoding, summed over latent dimensions."""
    z, z_hat = as_tensor(z), as_tensor(z_hat)
    _same_shape("ne_se", z, z_hat)
    return ops.sum(ops.square(ops.sub(z, z_hat)), axis=-1)


def gaussian_nll(z, mu, log_var) -> Tensor:
    """Per-dimension -log N(z; mu, exp(log_var)), variance floored at 1e-8."""
    z, mu, log_var = as_tensor(z), as_tensor(mu), as_tensor(log_var)
    _same_shape("gaussian_nll", z, mu)
    _same_shape("gaussian_nll", z, log_var)
    floored = ops.add(log_var, ops.relu(ops.sub(LOG_VAR_FLOOR, log_var)))
    quad = ops.mul(ops.square(ops.sub(z, mu)), ops.exp(ops.neg(floored)))
    return ops.add(ops.add(ops.mul(floored, 0.5), HALF_LOG_2PI), ops.mul(quad, 0.5))


def ne_lp(z, mu_hat, log_var_hat, c: float) -> Tensor:
    """
    Capped log-probability re-encoding loss per sample.

    A dimension contributes its NLL only when that NLL is >= c; c = -inf keeps
    every term, c = +inf drops every term.
    """
    nll = gaussian_nll(z, mu_hat, log_var_hat)
    keep = (nll.data >= c).astype(np.float64)
    return ops.sum(ops.mul(nll, keep), axis=-1)


def anneal_weight(epoch: int, schedule: AnnealSchedule) -> float:
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    if schedule.epochs == 0 or epoch >= schedule.epochs:
        return schedule.end_weight
    fraction = epoch / schedule.epochs
    return schedule.start_weight + (schedule.end_weight - schedule.start_weight) * fraction


def kl_weight_for(config: LossConfig, epoch: Optional[int] = None) -> float:
    """
    KL weight for a variant at an epoch. ``epoch=None`` means after annealing.

    beta-VAE follows the same ramp but stops once it reaches beta; without
    annealing it uses beta directly.
    """
    if config.anneal is None:
        base = 1.0
    elif epoch is None:
        base = config.anneal.end_weight
    else:
        base = anneal_weight(epoch, config.anneal)
    if config.variant == "beta":
        return min(base, config.beta) if config.anneal is not None else config.beta
    return base


def loss_graph(
    batch: np.ndarray,
    model: VAEModel,
    config: LossConfig,
    rng: np.random.Generator,
    epoch: Optional[int] = None,
    terms: Optional[dict] = None,
) -> Tuple[Tensor, LossReport]:
    """
    Build the objective for one batch; returns the differentiable total and its decomposition.

    ``terms``, when given, receives each term as soon as it is computed, so a
    caller still sees the finished ones when a later op fails.
    """
    terms = {} if terms is None else terms
    x = as_tensor(batch)
    code = encode(x, model.encoder, rng)
    recon = decode(code.z, model.decoder)

    recon_nll = ops.mean(ops.sum(bernoulli_nll(recon.logits, x), axis=1))
    terms["recon_nll"] = float(recon_nll.data)
    kl = ops.mean(ops.sum(kl_diag_gauss_to_std(code.mu, code.log_var), axis=1))
    terms["kl"] = float(kl.data)
    kl_weight = kl_weight_for(config, epoch)

    if config.variant in ("ne_se", "ne_lp"):
        re_code = reencode(recon, model.encoder, rng, binarize=config.binarize_reencode)
        if config.variant == "ne_se":
            per_sample = ne_se(code.z, re_code.z)
        else:
            per_sample = ne_lp(code.z, re_code.mu, re_code.log_var, config.cap_c)
        ne_term = ops.mul(ops.mean(per_sample), config.ne_weight)
    else:
        ne_term = Tensor(0.0)
    terms["ne_term"] = float(ne_term.data)

    total = ops.add(ops.add(recon_nll, ops.mul(kl, kl_weight)), ne_term)
    report = LossReport(
        recon_nll=float(recon_nll.data),
        kl=float(kl.data),
        ne_term=float(ne_term.data),
        kl_weight_applied=kl_weight,
        total=float(total.data),
    )
    return total, report


def total_loss(
    batch: np.ndarray,
    model: VAEModel,
    config: LossConfig,
    rng: np.random.Generator,
    epoch: Optional[int] = None,
) -> LossReport:
    _, report = loss_graph(batch, model, config, rng, epoch)
    return report
