# nevae/metrics/diagnostics.py

import logging
import math
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from nevae.data import Dataset, take_subset
from nevae.errors import DatasetError
from nevae.losses import bernoulli_nll, gaussian_nll, kl_diag_gauss_to_std, ne_se
from nevae.metrics.types import AU_THRESHOLD, DiagnosticsReport, EvalConfig
from nevae.models import EncoderParams, VAEModel, decode, encode, mlp_forward, reencode

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
# Rows of z scored against the whole mixture at once.
_MIXTURE_CHUNK = 256


def _batches(images: np.ndarray, batch_size: int) -> Iterator[np.ndarray]:
    for start in range(0, images.shape[0], batch_size):
        yield images[start:start + batch_size]


def posterior_params(encoder: EncoderParams, images: np.ndarray, batch_size: int = 500) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior means and log-variances for every row, without sampling."""
    mus, log_vars = [], []
    for batch in _batches(images, batch_size):
        out = mlp_forward(encoder, batch).data
        mus.append(out[:, :encoder.n_z])
        log_vars.append(out[:, encoder.n_z:])
    return np.concatenate(mus), np.concatenate(log_vars)


def activity(mus: np.ndarray) -> np.ndarray:
    """A_z: unbiased variance over the dataset of each dimension's posterior mean."""
    mus = np.asarray(mus, dtype=np.float64)
    if mus.ndim != 2 or mus.shape[0] < 2:
        raise DatasetError(f"activity needs at least 2 posterior means, got shape {mus.shape}")
    return np.var(mus, axis=0, ddof=1)


def active_units(activity_values, threshold: float = AU_THRESHOLD) -> int:
    return int(np.sum(np.asarray(activity_values) > threshold))


def _diag_log_density(z: np.ndarray, mu: np.ndarray, log_var: np.ndarray) -> np.ndarray:
    """log N(z_i; mu_j, diag exp(log_var_j)) for every pair (i, j) -> [len(z), len(mu)]."""
    precision = np.exp(-log_var)
    quad = (z * z) @ precision.T - 2.0 * z @ (mu * precision).T + np.sum(mu * mu * precision, axis=1)
    return -0.5 * (quad + np.sum(log_var, axis=1) + mu.shape[1] * LOG_2PI)


def _mi_terms(
    mu: np.ndarray,
    log_var: np.ndarray,
    m_samples: int,
    rng: np.random.Generator,
    estimator: str = "control_variate",
) -> Tuple[float, float, float]:
    """(mi, mean KL(q(z|x)||p), KL(q(z)||p)) with the rows of mu/log_var as mixture components."""
    n = mu.shape[0]
    kl_mean = float(np.mean(np.sum(0.5 * (mu * mu + np.exp(log_var) - 1.0 - log_var), axis=1)))

    owner = np.repeat(np.arange(n), m_samples)
    eps = rng.standard_normal((owner.size, mu.shape[1]))
    z = mu[owner] + np.exp(0.5 * log_var[owner]) * eps

    log_q_z = np.empty(owner.size)
    for start in range(0, owner.size, _MIXTURE_CHUNK):
        chunk = z[start:start + _MIXTURE_CHUNK]
        log_q_z[start:start + _MIXTURE_CHUNK] = logsumexp(_diag_log_density(chunk, mu, log_var), axis=1) - math.log(n)

    if estimator == "direct":
        log_p_z = -0.5 * np.sum(z * z + LOG_2PI, axis=1)
        agg_kl = float(np.mean(log_q_z - log_p_z))
    else:
        log_q_own = -0.5 * np.sum(eps * eps + log_var[owner] + LOG_2PI, axis=1)
        agg_kl = kl_mean + float(np.mean(log_q_z - log_q_own))
    return kl_mean - agg_kl, kl_mean, agg_kl


def mutual_information(
    encoder: EncoderParams,
    dataset: Dataset,
    m_samples: int,
    rng: np.random.Generator,
    max_items: int = 2048,
    estimator: str = "control_variate",
    batch_size: int = 500,
) -> float:
    """I_q = E_x KL(q(z|x) || p(z)) - KL(q(z) || p(z)), aggregated posterior estimated by Monte Carlo."""
    if dataset.n == 0:
        raise DatasetError("mutual_information on an empty dataset")
    if m_samples < 1:
        raise ValueError("m_samples must be >= 1")
    images = dataset.images
    if dataset.n > max_items:
        images = images[np.sort(rng.choice(dataset.n, size=max_items, replace=False))]
    mu, log_var = posterior_params(encoder, images, batch_size)
    mi, _, _ = _mi_terms(mu, log_var, m_samples, rng, estimator)
    return mi


def _reencode_terms(
    model: VAEModel,
    images: np.ndarray,
    rng: np.random.Generator,
    passes: int = 1,
    batch_size: int = 500,
) -> Tuple[float, float]:
    se_total, lp_total, count = 0.0, 0.0, 0
    for _ in range(passes):
        for batch in _batches(images, batch_size):
            code = encode(batch, model.encoder, rng)
            recon = decode(code.z, model.decoder)
            re_code = reencode(recon, model.encoder, rng)
            se_total += float(np.sum(ne_se(code.z, re_code.z).data))
            lp_total += float(np.sum(gaussian_nll(code.z, re_code.mu, re_code.log_var).data))
            count += batch.shape[0]
    return se_total / count, lp_total / count


def reencode_error(model: VAEModel, dataset: Dataset, rng: np.random.Generator, passes: int = 1) -> float:
    """Mean ||z - z_hat||^2 over the dataset from encode -> decode -> re-encode."""
    se, _ = _reencode_terms(model, dataset.images, rng, passes)
    return se


def evaluate(model: VAEModel, dataset: Dataset, config: Optional[EvalConfig] = None) -> DiagnosticsReport:
    config = config or EvalConfig()
    if config.max_items is not None:
        dataset = take_subset(dataset, config.max_items, config.seed)
    elbo_rng, mi_rng, re_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(3))

    recon_total, kl_total = 0.0, 0.0
    mus, log_vars = [], []
    for batch in _batches(dataset.images, config.batch_size):
        code = encode(batch, model.encoder, elbo_rng)
        recon = decode(code.z, model.decoder)
        recon_total += float(np.sum(bernoulli_nll(recon.logits, batch).data))
        kl_total += float(np.sum(kl_diag_gauss_to_std(code.mu, code.log_var).data))
        mus.append(code.mu.data)
        log_vars.append(code.log_var.data)
    mu, log_var = np.concatenate(mus), np.concatenate(log_vars)

    if dataset.n >= 2:
        act = activity(mu)
    else:
        logger.warning(f"Activity is undefined for {dataset.n} item, reporting every dimension as inactive")
        act = np.zeros(mu.shape[1])
    if dataset.n > config.mi_max_items:
        keep = np.sort(mi_rng.choice(dataset.n, size=config.mi_max_items, replace=False))
        mi, _, agg_kl = _mi_terms(mu[keep], log_var[keep], config.mi_samples, mi_rng, config.mi_estimator)
    else:
        mi, _, agg_kl = _mi_terms(mu, log_var, config.mi_samples, mi_rng, config.mi_estimator)
    se, lp = _reencode_terms(model, dataset.images, re_rng, config.reencode_passes, config.batch_size)

    recon_nll = recon_total / dataset.n
    kl = kl_total / dataset.n
    report = DiagnosticsReport(
        neg_elbo=recon_nll + kl,
        recon_nll=recon_nll,
        kl=kl,
        mi=mi,
        agg_posterior_kl=agg_kl,
        au_count=active_units(act, config.au_threshold),
        activity=[float(a) for a in act],
        mean_reencode_se=se,
        mean_reencode_lp=lp,
        au_threshold=config.au_threshold,
        n_items=dataset.n,
        activity_defined=dataset.n >= 2,
    )
    logger.info(
        f"Diagnostics over {dataset.n} items: -ELBO={report.neg_elbo:.3f} KL={report.kl:.3f} "
        f"MI={report.mi:.3f} AU={report.au_count}/{model.n_z} reencode_se={report.mean_reencode_se:.3f}"
    )
    return report
