# nevae/data/transforms.py

import hashlib
import logging
from typing import Optional

import numpy as np

from nevae.data.types import BinarizeMode, Dataset
from nevae.errors import DatasetError

logger = logging.getLogger(__name__)


def binarize(dataset: Dataset, mode: BinarizeMode = "threshold", seed: Optional[int] = None) -> Dataset:
    """
    Map pixels to {0, 1}.

    threshold: x >= 0.5 -> 1. stochastic: one Bernoulli(x) draw per pixel, fixed by ``seed``.
    """
    if mode == "threshold":
        images = (dataset.images >= 0.5).astype(np.float64)
    elif mode == "stochastic":
        rng = np.random.default_rng(seed)
        images = (rng.random(dataset.images.shape) < dataset.images).astype(np.float64)
    else:
        raise ValueError(f"unknown binarize mode {mode!r}")
    return dataset.with_images(images)


def subsample_per_class(dataset: Dataset, n_per_class: int, seed: int) -> Dataset:
    """Stratified subsample keeping at most ``n_per_class`` items of every label, original order preserved."""
    if dataset.labels is None:
        raise DatasetError("subsample_per_class requires labels")
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    keep = []
    for label in np.unique(dataset.labels):
        members = np.flatnonzero(dataset.labels == label)
        if members.size > n_per_class:
            members = rng.choice(members, size=n_per_class, replace=False)
        keep.append(members)
    indices = np.sort(np.concatenate(keep))
    logger.info(f"Per-class subsample: {indices.size} of {dataset.n} items ({n_per_class} per class)")
    return dataset.select(indices)


def take_subset(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Deterministic random subset of ``n`` items in original order."""
    if n >= dataset.n:
        return dataset
    rng = np.random.default_rng(seed)
    return dataset.select(np.sort(rng.choice(dataset.n, size=n, replace=False)))


def dataset_fingerprint(dataset: Dataset) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(dataset.images, dtype="<f8").tobytes())
    digest.update(str(dataset.images.shape).encode())
    if dataset.labels is not None:
        digest.update(np.ascontiguousarray(dataset.labels, dtype="<i8").tobytes())
    return digest.hexdigest()
