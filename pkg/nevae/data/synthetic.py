# nevae/data/synthetic.py

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from nevae.data.types import Dataset, SyntheticSpec, square_side

logger = logging.getLogger(__name__)


def _streams(spec: SyntheticSpec) -> Tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    mapping, factors, noise = np.random.SeedSequence(spec.seed).spawn(3)
    return np.random.default_rng(mapping), np.random.default_rng(factors), np.random.default_rng(noise)


def synthetic_mapping(spec: SyntheticSpec) -> np.ndarray:
    """The fixed [k, D] linear map of a spec."""
    rng, _, _ = _streams(spec)
    return rng.normal(0.0, spec.mapping_scale, size=(spec.intrinsic_dim, spec.ambient_dim))


def synthetic_factors(spec: SyntheticSpec) -> np.ndarray:
    _, rng, _ = _streams(spec)
    return rng.uniform(-1.0, 1.0, size=(spec.n_samples, spec.intrinsic_dim))


def make_synthetic(spec: SyntheticSpec, factors: Optional[np.ndarray] = None) -> Dataset:
    """
    Images clamp(sigmoid(factors @ W) + noise, 0, 1).

    ``factors`` overrides the uniform [-1, 1] draw; the map and noise streams are unchanged.
    """
    mapping = synthetic_mapping(spec)
    if factors is None:
        factors = synthetic_factors(spec)
    factors = np.asarray(factors, dtype=np.float64)
    if factors.ndim != 2 or factors.shape[1] != spec.intrinsic_dim:
        raise ValueError(f"factors must be [N, {spec.intrinsic_dim}], got {factors.shape}")
    images = expit(factors @ mapping)
    if spec.noise_sigma > 0.0:
        _, _, noise_rng = _streams(spec)
        images = images + noise_rng.normal(0.0, spec.noise_sigma, size=images.shape)
    images = np.clip(images, 0.0, 1.0)
    logger.info(
        f"Synthetic dataset: {factors.shape[0]} samples, k={spec.intrinsic_dim}, D={spec.ambient_dim}, "
        f"noise={spec.noise_sigma}"
    )
    return Dataset(images=images, image_side=square_side(spec.ambient_dim), intrinsic_dim=spec.intrinsic_dim)
