# nevae/autodiff/tensor.py

import logging
import threading
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from nevae.errors import DomainError, ShapeError, TapeError

logger = logging.getLogger(__name__)

# Per-thread stack of active tapes; a tape never crosses threads.
_local = threading.local()

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class Tensor:
    """
    Dense float64 array that can take part in a gradient tape.

    Leaves are created with requires_grad=True (parameters, latent codes under
    optimization). Results of ops require a gradient only when a tape is
    active and at least one operand requires one.
    """

    __slots__ = ("data", "grad", "requires_grad", "tape_id", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.tape_id: Optional[int] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item", self.shape, detail="only single-element tensors convert to a float")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # --- operator sugar, dispatched to nevae.autodiff.ops ---
    def __add__(self, other): return _ops.add(self, other)
    def __radd__(self, other): return _ops.add(other, self)
    def __sub__(self, other): return _ops.sub(self, other)
    def __rsub__(self, other): return _ops.sub(other, self)
    def __mul__(self, other): return _ops.mul(self, other)
    def __rmul__(self, other): return _ops.mul(other, self)
    def __truediv__(self, other): return _ops.div(self, other)
    def __rtruediv__(self, other): return _ops.div(other, self)
    def __neg__(self): return _ops.neg(self)
    def __matmul__(self, other): return _ops.matmul(self, other)
    def __getitem__(self, key): return _ops.getitem(self, key)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


class _Node:
    __slots__ = ("out", "inputs", "backward_fn", "op")

    def __init__(self, out: Tensor, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str):
        self.out = out
        self.inputs = inputs
        self.backward_fn = backward_fn
        self.op = op


class GradientTape:
    """
    Define-by-run recording of ops for reverse-mode differentiation.

    Usage::

        with GradientTape() as tape:
            loss = ops.sum(ops.square(x))
        backward(loss)

    Nodes are appended in execution order, so replaying them backwards is a
    valid topological order.

    With ``watch_accessed_variables=False`` only tensors passed to ``watch``
    are leaves: gradients still flow through every other operand, but
    nothing else gets its ``grad`` written.
    """

    def __init__(self, watch_accessed_variables: bool = True):
        self._nodes: List[_Node] = []
        self._leaves: Dict[int, Tensor] = {}
        self._watch_accessed = watch_accessed_variables

    def _recorded_here(self, tensor: Tensor) -> bool:
        index = tensor.tape_id
        return index is not None and index < len(self._nodes) and self._nodes[index].out is tensor

    def __enter__(self) -> "GradientTape":
        stack = getattr(_local, "stack", None)
        if stack is None:
            stack = _local.stack = []
        stack.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _local.stack.pop()

    def __len__(self) -> int:
        return len(self._nodes)

    def watch(self, *tensors: Tensor) -> None:
        for tensor in tensors:
            if not tensor.requires_grad:
                tensor.requires_grad = True
            # a result of another tape is a plain leaf here
            if not self._recorded_here(tensor):
                self._leaves[id(tensor)] = tensor

    @property
    def leaves(self) -> List[Tensor]:
        return list(self._leaves.values())

    def record(self, out: Tensor, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str) -> None:
        for tensor in inputs:
            if not tensor.requires_grad or self._recorded_here(tensor):
                continue
            if self._watch_accessed:
                self._leaves[id(tensor)] = tensor
        out.requires_grad = True
        out.tape_id = len(self._nodes)
        self._nodes.append(_Node(out, inputs, backward_fn, op))

    def backward(self, root: Tensor) -> None:
        if root.size != 1:
            raise TapeError(f"backward requires a scalar root, got shape {root.shape}")

        adjoints: Dict[int, np.ndarray] = {}
        if self._recorded_here(root):
            adjoints[id(root)] = np.ones_like(root.data)
            for node in reversed(self._nodes[: root.tape_id + 1]):
                upstream = adjoints.pop(id(node.out), None)
                if upstream is None:
                    continue
                input_grads = node.backward_fn(upstream)
                for tensor, grad in zip(node.inputs, input_grads):
                    if grad is None or not tensor.requires_grad:
                        continue
                    key = id(tensor)
                    if key in adjoints:
                        adjoints[key] = adjoints[key] + grad
                    else:
                        adjoints[key] = grad
        elif id(root) in self._leaves:
            adjoints[id(root)] = np.ones_like(root.data)
        else:
            logger.debug("backward: root is not on the tape, every leaf receives a zero gradient")

        for key, leaf in self._leaves.items():
            grad = adjoints.get(key)
            leaf.grad = np.zeros_like(leaf.data) if grad is None else np.asarray(grad, dtype=np.float64).reshape(leaf.shape)


def active_tape() -> Optional[GradientTape]:
    stack = getattr(_local, "stack", None)
    return stack[-1] if stack else None


def backward(root: Tensor, tape: Optional[GradientTape] = None) -> None:
    """Populate ``grad`` on every leaf of the tape with d(root)/d(leaf)."""
    tape = tape or active_tape()
    if tape is None:
        raise TapeError("backward called without an active gradient tape")
    tape.backward(root)


def make_result(data: np.ndarray, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn, op: str) -> Tensor:
    """Wrap an op result and record it on the active tape when needed."""
    if not np.all(np.isfinite(data)):
        raise DomainError(f"{op}: produced non-finite values")
    out = Tensor(data)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        tape.record(out, inputs, backward_fn, op)
    return out


from nevae.autodiff import ops as _ops  # noqa: E402
