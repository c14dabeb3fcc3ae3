# tests/test_losses.py

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate
from scipy.stats import norm

from nevae.errors import ShapeError
from nevae.losses import (
    AnnealSchedule,
    LossConfig,
    anneal_weight,
    bernoulli_nll,
    gaussian_nll,
    kl_diag_gauss_to_std,
    kl_weight_for,
    ne_lp,
    ne_se,
    total_loss,
)

HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def test_kl_examples():
    kl = kl_diag_gauss_to_std([[0.0, 1.0, 0.0]], [[0.0, 0.0, math.log(4.0)]]).data
    np.testing.assert_allclose(kl, [[0.0, 0.5, 0.5 * (4 - 1 - math.log(4))]], atol=1e-12)


def test_kl_matches_numerical_integration_on_grid():
    mus = np.linspace(-2.0, 2.0, 20)
    sigmas = np.linspace(0.3, 2.5, 20)
    mu_grid, sigma_grid = np.meshgrid(mus, sigmas)
    closed = kl_diag_gauss_to_std(mu_grid, np.log(sigma_grid ** 2)).data
    for i in range(20):
        for j in range(20):
            mu, sigma = mu_grid[i, j], sigma_grid[i, j]

            def integrand(z):
                return norm.pdf(z, mu, sigma) * (norm.logpdf(z, mu, sigma) - norm.logpdf(z))

            value, _ = integrate.quad(integrand, mu - 20 * sigma, mu + 20 * sigma, epsabs=1e-12, epsrel=1e-12, limit=200)
            assert closed[i, j] == pytest.approx(value, abs=1e-6)


def test_kl_nonnegative_and_zero_only_at_prior():
    rng = np.random.default_rng(0)
    kl = kl_diag_gauss_to_std(rng.normal(size=(50, 8)), rng.normal(size=(50, 8))).data
    assert np.all(kl >= -1e-12)
    assert np.all(kl > 0.0)


def test_bernoulli_nll_examples():
    values = bernoulli_nll([0.0, 50.0, -3.0], [1.0, 1.0, 1.0]).data
    assert values[0] == pytest.approx(math.log(2.0))
    assert values[1] == pytest.approx(0.0, abs=1e-20)
    assert values[2] == pytest.approx(3.0486, abs=1e-4)
    wide = bernoulli_nll(np.linspace(-500, 500, 101), np.full(101, 0.3)).data
    assert np.all(np.isfinite(wide))


def test_ne_se_examples():
    assert ne_se([[1.0, 2.0]], [[0.0, 0.0]]).data.tolist() == [5.0]
    assert ne_se([[1.0, 2.0]], [[1.0, 2.0]]).data.tolist() == [0.0]
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(10, 4)), rng.normal(size=(10, 4))
    np.testing.assert_array_equal(ne_se(a, b).data, ne_se(b, a).data)
    with pytest.raises(ShapeError):
        ne_se(a, b[:, :3])


def test_ne_lp_cap_examples():
    z = np.zeros((1, 3))
    assert ne_lp(z, z, z, 1.0).data.tolist() == [0.0]
    np.testing.assert_allclose(ne_lp(z, z, z, 0.5).data, [3 * HALF_LOG_2PI])
    rng = np.random.default_rng(2)
    a, b, c = rng.normal(size=(3, 6, 4))
    assert not np.any(ne_lp(a, b, c, 1e9).data)


def test_ne_lp_uncapped_matches_density():
    rng = np.random.default_rng(3)
    z, mu, log_var = rng.normal(size=(3, 8, 5))
    direct = -np.sum(norm.logpdf(z, mu, np.exp(0.5 * log_var)), axis=1)
    np.testing.assert_allclose(ne_lp(z, mu, log_var, -np.inf).data, direct, rtol=0, atol=1e-10)


def test_ne_lp_nonincreasing_in_cap():
    rng = np.random.default_rng(4)
    z, mu, log_var = rng.normal(size=(3, 8, 5))
    values = [ne_lp(z, mu, log_var, c).data for c in (0.0, 0.5, 1.0, 2.0, 5.0)]
    for looser, tighter in zip(values, values[1:]):
        assert np.all(tighter <= looser)


def test_gaussian_nll_floors_variance():
    tiny = gaussian_nll([[0.0]], [[0.0]], [[-100.0]]).data
    assert tiny[0, 0] == pytest.approx(0.5 * math.log(1e-8) + HALF_LOG_2PI)


def test_anneal_schedule():
    schedule = AnnealSchedule()
    assert anneal_weight(0, schedule) == pytest.approx(0.1)
    assert anneal_weight(5, schedule) == pytest.approx(0.55)
    assert anneal_weight(10, schedule) == 1.0
    assert anneal_weight(50, schedule) == 1.0
    with pytest.raises(ValueError):
        anneal_weight(-1, schedule)


def test_kl_weight_for_variants():
    assert kl_weight_for(LossConfig(variant="vanilla", anneal=None), 0) == 1.0
    assert kl_weight_for(LossConfig(variant="beta", beta=0.2, anneal=None), 0) == 0.2
    beta = LossConfig(variant="beta", beta=0.4)
    assert kl_weight_for(beta, 0) == pytest.approx(0.1)
    assert kl_weight_for(beta, 9) == 0.4
    assert kl_weight_for(beta) == 0.4
    assert kl_weight_for(LossConfig()) == 1.0


def test_loss_config_validation_and_parsing():
    assert LossConfig(anneal="none").anneal is None
    parsed = LossConfig(anneal="0.2,1.0,5").anneal
    assert (parsed.start_weight, parsed.end_weight, parsed.epochs) == (0.2, 1.0, 5)
    with pytest.raises(ValidationError):
        LossConfig(variant="beta", beta=0.0)
    with pytest.raises(ValidationError):
        AnnealSchedule(start_weight=0.9, end_weight=0.5)
    with pytest.raises(ValidationError):
        LossConfig(variant="iwae")


# --- Objective equivalences under a shared seed ---

def _report(model, batch, **config):
    return total_loss(batch, model, LossConfig(**config), np.random.default_rng(11), epoch=3)


def test_beta_one_is_vanilla(tiny_model, tiny_dataset):
    batch = tiny_dataset.images[:10]
    assert _report(tiny_model, batch, variant="beta", beta=1.0).total == _report(tiny_model, batch).total


def test_huge_cap_is_vanilla(tiny_model, tiny_dataset):
    batch = tiny_dataset.images[:10]
    lp = _report(tiny_model, batch, variant="ne_lp", cap_c=1e9)
    assert lp.ne_term == 0.0
    assert lp.total == _report(tiny_model, batch).total


def test_ne_se_adds_mean_reencoding_error(tiny_model, tiny_dataset):
    batch = tiny_dataset.images[:10]
    vanilla = _report(tiny_model, batch)
    se = _report(tiny_model, batch, variant="ne_se")
    assert se.ne_term > 0.0
    assert se.recon_nll == vanilla.recon_nll and se.kl == vanilla.kl
    assert se.total == vanilla.total + se.ne_term


def test_report_decomposition(tiny_model, tiny_dataset):
    report = _report(tiny_model, tiny_dataset.images[:10], variant="ne_lp", cap_c=-1.0)
    assert report.total == pytest.approx(report.recon_nll + report.kl_weight_applied * report.kl + report.ne_term)
    assert report.kl >= 0.0 and report.recon_nll >= 0.0
    assert report.kl_weight_applied == pytest.approx(0.37)


def test_anneal_only_changes_kl_weight(tiny_model, tiny_dataset):
    batch = tiny_dataset.images[:10]
    annealed = _report(tiny_model, batch)
    flat = _report(tiny_model, batch, anneal=None)
    assert annealed.recon_nll == flat.recon_nll and annealed.kl == flat.kl
    assert annealed.kl_weight_applied != flat.kl_weight_applied
