# nevae/autodiff/gradcheck.py

"""Central finite-difference oracles for checking reverse-mode gradients."""

from typing import Callable

import numpy as np

from nevae.autodiff.tensor import GradientTape, Tensor, backward


def numerical_gradient(f: Callable[[], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """d f / d x by central differences, perturbing ``x`` in place and restoring it."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        original = x[idx]
        x[idx] = original + eps
        plus = f()
        x[idx] = original - eps
        minus = f()
        x[idx] = original
        grad[idx] = (plus - minus) / (2.0 * eps)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """Norm-wise relative error ||a - n|| / max(||a||, ||n||, floor)."""
    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)), floor)
    return float(np.linalg.norm(analytic - numeric)) / scale


def check_gradients(build: Callable[..., Tensor], *inputs: Tensor, eps: float = 1e-5) -> float:
    """
    Worst relative error between tape gradients and finite differences.

    ``build`` maps the input tensors to a scalar Tensor and must be a pure
    function of their data.
    """
    with GradientTape() as tape:
        tape.watch(*inputs)
        root = build(*inputs)
        backward(root)
    worst = 0.0
    for tensor in inputs:
        numeric = numerical_gradient(lambda: float(build(*inputs).data), tensor.data, eps)
        worst = max(worst, max_relative_error(tensor.grad, numeric))
    return worst
