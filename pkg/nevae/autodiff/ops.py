# nevae/autodiff/ops.py

"""
Primitive tensor ops with their reverse-mode rules.

Broadcasting is right-aligned with size-1 expansion (missing leading axes
count as size 1). Every op validates shapes up front and raises ShapeError
naming both operands.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from nevae.autodiff.tensor import Tensor, as_tensor, make_result
from nevae.errors import DomainError, ShapeError

Operand = Union[Tensor, float, int, np.ndarray]


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, a.shape, b.shape) from None


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# --- elementwise binary ---

def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def backward_fn(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result(a.data + b.data, (a, b), backward_fn, "add")


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def backward_fn(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result(a.data - b.data, (a, b), backward_fn, "sub")


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def backward_fn(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_result(a.data * b.data, (a, b), backward_fn, "mul")


def div(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", a, b)
    if np.any(b.data == 0.0):
        raise DomainError("div: division by zero")
    out = a.data / b.data

    def backward_fn(g):
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)

    return make_result(out, (a, b), backward_fn, "div")


def neg(x: Operand) -> Tensor:
    x = as_tensor(x)
    return make_result(-x.data, (x,), lambda g: (-g,), "neg")


# --- linear algebra ---

def matmul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape, "expected [n, k] @ [k, m]")

    def backward_fn(g):
        return g @ b.data.T, a.data.T @ g

    return make_result(a.data @ b.data, (a, b), backward_fn, "matmul")


# --- elementwise unary ---

def exp(x: Operand) -> Tensor:
    x = as_tensor(x)
    with np.errstate(over="ignore"):
        out = np.exp(x.data)
    return make_result(out, (x,), lambda g: (g * out,), "exp")


def log(x: Operand) -> Tensor:
    x = as_tensor(x)
    if np.any(x.data <= 0.0):
        raise DomainError(f"log: non-positive input (min {float(np.min(x.data))!r})")
    return make_result(np.log(x.data), (x,), lambda g: (g / x.data,), "log")


def tanh(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)
    return make_result(out, (x,), lambda g: (g * (1.0 - out * out),), "tanh")


def relu(x: Operand) -> Tensor:
    x = as_tensor(x)
    # Subgradient at exactly 0 is 0.
    mask = (x.data > 0.0).astype(np.float64)
    return make_result(x.data * mask, (x,), lambda g: (g * mask,), "relu")


def sigmoid(x: Operand) -> Tensor:
    x = as_tensor(x)
    out = expit(x.data)
    return make_result(out, (x,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def softplus(x: Operand) -> Tensor:
    """log(1 + exp(x)) without overflow."""
    x = as_tensor(x)
    out = np.logaddexp(0.0, x.data)
    return make_result(out, (x,), lambda g: (g * expit(x.data),), "softplus")


def square(x: Operand) -> Tensor:
    x = as_tensor(x)
    return make_result(x.data * x.data, (x,), lambda g: (2.0 * x.data * g,), "square")


# --- reductions ---

def _normalize_axis(op: str, x: Tensor, axis: int) -> int:
    if not -x.ndim <= axis < x.ndim:
        raise ShapeError(op, x.shape, detail=f"axis {axis} out of range")
    return axis % x.ndim


def sum(x: Operand, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    x = as_tensor(x)
    if axis is not None:
        axis = _normalize_axis("sum", x, axis)
    out = np.sum(x.data, axis=axis, keepdims=keepdims)

    def backward_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return make_result(np.asarray(out), (x,), backward_fn, "sum")


def mean(x: Operand, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else x.shape[_normalize_axis("mean", x, axis)]
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


# --- structural ---

def concatenate(tensors: Sequence[Operand], axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise ShapeError("concatenate", (), detail="no operands")
    first = tensors[0]
    axis = _normalize_axis("concatenate", first, axis)
    for other in tensors[1:]:
        if other.ndim != first.ndim or any(
            d1 != d2 for i, (d1, d2) in enumerate(zip(first.shape, other.shape)) if i != axis
        ):
            raise ShapeError("concatenate", first.shape, other.shape, f"mismatch off axis {axis}")
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward_fn(g):
        return tuple(np.split(g, splits, axis=axis))

    return make_result(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward_fn, "concatenate")


def slice_axis(x: Operand, start: int, stop: int, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    axis = _normalize_axis("slice", x, axis)
    if not 0 <= start <= stop <= x.shape[axis]:
        raise ShapeError("slice", x.shape, detail=f"range [{start}, {stop}) on axis {axis}")
    key = tuple(slice(start, stop) if i == axis else slice(None) for i in range(x.ndim))
    return getitem(x, key)


def getitem(x: Operand, key) -> Tensor:
    """Basic indexing only (ints, slices, Ellipsis); fancy indexing is rejected."""
    x = as_tensor(x)
    parts = key if isinstance(key, tuple) else (key,)
    for part in parts:
        if not (part is Ellipsis or isinstance(part, (int, np.integer, slice))):
            raise TypeError(f"getitem: unsupported index {part!r}; only basic slicing is differentiable")
    try:
        out = x.data[key]
    except IndexError as e:
        raise ShapeError("getitem", x.shape, detail=str(e)) from None

    def backward_fn(g):
        full = np.zeros_like(x.data)
        full[key] = g
        return (full,)

    return make_result(np.array(out, dtype=np.float64), (x,), backward_fn, "getitem")
