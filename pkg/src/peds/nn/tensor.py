"""Dense tensors with reverse-mode automatic differentiation.

Training math runs in 64-bit floats so finite-difference gradient checks
are meaningful; inference may run the same graph in 32 bits.  Every
operation validates that its result is finite and raises
:class:`NumericsError` otherwise.
"""

from __future__ import annotations

import numpy as np


class NumericsError(FloatingPointError):
    """A tensor operation produced NaN or infinity."""


def _checked(data: np.ndarray, op: str) -> np.ndarray:
    if not np.isfinite(data).all():
        raise NumericsError(f"non-finite values produced by {op}")
    return data


class Tensor:
    """A numpy array plus the backward closure that built it."""

    __slots__ = ("data", "grad", "requires_grad", "frozen", "max_norm",
                 "name", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False, name: str = "",
                 dtype=np.float64):
        arr = np.asarray(data, dtype=dtype)
        self.data = _checked(arr, "tensor construction")
        self.grad = None
        self.requires_grad = requires_grad
        self.frozen = False
        self.max_norm = None
        self.name = name
        self._backward = None
        self._parents = ()

    # -- plumbing ----------------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.data.shape}, grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, grad: np.ndarray):
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype)
        else:
            self.grad += grad

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar tensor")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operators ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return getitem(self, key)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward, op: str) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = _checked(data, op)
    out.grad = None
    out.requires_grad = any(p.requires_grad for p in parents)
    out.frozen = False
    out.max_norm = None
    out.name = ""
    out._parents = tuple(p for p in parents if p.requires_grad) if out.requires_grad else ()
    out._backward = backward if out.requires_grad else None
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum the gradient of a broadcast result back to the operand shape."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.data.shape))
    return _make(a.data + b.data, (a, b), backward, "add")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))
    return _make(a.data * b.data, (a, b), backward, "mul")


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)
    return _make(a.data @ b.data, (a, b), backward, "matmul")


def reshape(a: Tensor, shape) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        a._accumulate(g.reshape(a.data.shape))
    return _make(a.data.reshape(shape), (a,), backward, "reshape")


def transpose(a: Tensor, axes) -> Tensor:
    a = as_tensor(a)
    inverse = np.argsort(axes)

    def backward(g):
        a._accumulate(g.transpose(inverse))
    return _make(a.data.transpose(axes), (a,), backward, "transpose")


def _is_basic_index(key) -> bool:
    parts = key if isinstance(key, tuple) else (key,)
    return all(isinstance(p, (slice, int)) or p is Ellipsis or p is None for p in parts)


def getitem(a: Tensor, key) -> Tensor:
    a = as_tensor(a)
    basic = _is_basic_index(key)

    def backward(g):
        full = np.zeros_like(a.data)
        if basic:
            full[key] += g
        else:
            np.add.at(full, key, g)
        a._accumulate(full)
    return _make(a.data[key], (a,), backward, "getitem")


def concatenate(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        parts = np.split(g, splits, axis=axis)
        for t, part in zip(tensors, parts):
            if t.requires_grad:
                t._accumulate(part)
    return _make(np.concatenate([t.data for t in tensors], axis=axis),
                 tuple(tensors), backward, "concatenate")


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.data.shape).copy())
            return
        gg = g if keepdims else np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(gg, a.data.shape).copy())
    return _make(a.data.sum(axis=axis, keepdims=keepdims), (a,), backward, "sum")


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    if axis is None:
        count = a.data.size
    elif isinstance(axis, tuple):
        count = int(np.prod([a.data.shape[i] for i in axis]))
    else:
        count = a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def square(a: Tensor) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        a._accumulate(g * 2.0 * a.data)
    return _make(a.data * a.data, (a,), backward, "square")


LOG_EPS = 1e-6


def log_eps(a: Tensor, eps: float = LOG_EPS) -> Tensor:
    """ln(max(x, eps)); the gradient is zero in the floored region."""
    a = as_tensor(a)
    floored = np.maximum(a.data, eps)

    def backward(g):
        a._accumulate(g * (a.data > eps) / floored)
    return _make(np.log(floored), (a,), backward, "log_eps")


def log(a: Tensor) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        a._accumulate(g / a.data)
    return _make(np.log(a.data), (a,), backward, "log")


def clip(a: Tensor, lo: float, hi: float) -> Tensor:
    a = as_tensor(a)
    inside = (a.data > lo) & (a.data < hi)

    def backward(g):
        a._accumulate(g * inside)
    return _make(np.clip(a.data, lo, hi), (a,), backward, "clip")


def sigmoid(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out_data = 1.0 / (1.0 + np.exp(-np.clip(a.data, -500, 500)))

    def backward(g):
        a._accumulate(g * out_data * (1.0 - out_data))
    return _make(out_data, (a,), backward, "sigmoid")


def tanh(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out_data = np.tanh(a.data)

    def backward(g):
        a._accumulate(g * (1.0 - out_data**2))
    return _make(out_data, (a,), backward, "tanh")


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    """Row-normalized exponentials with max-subtraction stabilization."""
    a = as_tensor(a)
    if a.data.shape[axis] == 0:
        raise ValueError("softmax over an empty axis")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    out_data = exp / exp.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out_data).sum(axis=axis, keepdims=True)
        a._accumulate(out_data * (g - inner))
    return _make(out_data, (a,), backward, "softmax")


def pointwise(a: Tensor, kind: str) -> Tensor:
    """Dispatch for the activation kinds used by the network layers."""
    table = {"square": square, "log_eps": log_eps, "sigmoid": sigmoid,
             "softmax": softmax, "tanh": tanh}
    if kind not in table:
        raise ValueError(f"unknown pointwise kind {kind!r}")
    return table[kind](a)


def dropout(a: Tensor, rate: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Zero entries with probability ``rate`` during training, scaling the
    survivors by 1/(1-rate); identity at inference."""
    a = as_tensor(a)
    if not training or rate == 0.0:
        return a
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate {rate} outside [0, 1)")
    mask = (rng.random(a.data.shape) >= rate) / (1.0 - rate)

    def backward(g):
        a._accumulate(g * mask)
    return _make(a.data * mask, (a,), backward, "dropout")
