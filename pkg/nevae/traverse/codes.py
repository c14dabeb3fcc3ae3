# nevae/traverse/codes.py

import logging
from typing import List, Sequence

import numpy as np

from nevae.errors import TraverseError
from nevae.traverse.types import TraverseSpec

logger = logging.getLogger(__name__)


def random_direction(n_z: int, seed: int, zero_dims: Sequence[int] = ()) -> np.ndarray:
    """Unit vector drawn uniformly on the sphere of the dimensions not in ``zero_dims``."""
    direction = np.random.default_rng(seed).standard_normal(n_z)
    direction[list(zero_dims)] = 0.0
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        raise TraverseError(f"zero_dims {list(zero_dims)} leave no free dimension out of {n_z}")
    return direction / norm


def traverse_codes(spec: TraverseSpec, n_z: int) -> np.ndarray:
    """[n_points, n_z] codes along the traverse described by ``spec``."""
    bad = [d for d in spec.zero_dims if d >= n_z]
    if bad:
        raise TraverseError(f"zero_dims {bad} out of range for n_z={n_z}")

    codes = np.zeros((spec.n_points, n_z))
    if spec.kind == "single_dim":
        if spec.dim >= n_z:
            raise TraverseError(f"dim {spec.dim} out of range for n_z={n_z}")
        codes[:, spec.dim] = np.linspace(spec.lo, spec.hi, spec.n_points)
    else:
        direction = random_direction(n_z, spec.seed, spec.zero_dims)
        codes = np.outer(np.linspace(0.0, spec.radius, spec.n_points), direction)
    return codes


def zero_top_active(activity: Sequence[float], k: int) -> List[int]:
    """Indices of the k largest activities, ties to the lower index, returned in ascending order."""
    activity = np.asarray(activity, dtype=np.float64)
    if not 0 <= k <= activity.size:
        raise ValueError(f"k must lie in [0, {activity.size}], got {k}")
    order = np.argsort(-activity, kind="stable")
    return sorted(int(i) for i in order[:k])
