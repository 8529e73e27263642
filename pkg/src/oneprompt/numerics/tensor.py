"""Dense tensors with reverse-mode automatic differentiation.

Everything is a thin wrapper around numpy arrays plus a tape of backward
closures. float32 is the working precision; gradient checking switches the
whole stack to float64 through the `precision` context manager.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager

import numpy as np
from scipy.special import expit


class ShapeError(ValueError):
    """An operation was called with incompatible shapes (contract violation)."""


class ConfigError(ValueError):
    """An operation was configured with invalid hyperparameters."""


_state = threading.local()


def default_dtype():
    return getattr(_state, "dtype", np.float32)


@contextmanager
def precision(dtype):
    """Temporarily switch the default dtype, e.g. precision(np.float64)."""
    prev = default_dtype()
    _state.dtype = np.dtype(dtype).type
    try:
        yield
    finally:
        _state.dtype = prev


def _as_array(value, dtype=None):
    return np.asarray(value, dtype=dtype or default_dtype())


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A dense n-d array node in the autodiff graph."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = _parents
        self._backward = _backward

    # ------------------------------------------------------------------ basics

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def item(self):
        return float(self.data)

    def numpy(self):
        return self.data

    def detach(self):
        return Tensor(self.data)

    @staticmethod
    def zeros(shape, requires_grad=False):
        return Tensor(np.zeros(shape, dtype=default_dtype()), requires_grad)

    @staticmethod
    def ones(shape, requires_grad=False):
        return Tensor(np.ones(shape, dtype=default_dtype()), requires_grad)

    # ---------------------------------------------------------------- backward

    def backward(self):
        if self.data.size != 1:
            raise ShapeError(f"backward() requires a scalar, got shape {self.shape}")
        topo, seen = [], set()

        def visit(node):
            if id(node) in seen or not node.requires_grad:
                return
            seen.add(id(node))
            for p in node._parents:
                visit(p)
            topo.append(node)

        visit(self)
        for node in topo:
            node.grad = np.zeros_like(node.data)
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward(node.grad)

    def zero_grad(self):
        self.grad = None

    # -------------------------------------------------------------- arithmetic

    @staticmethod
    def _lift(value):
        return value if isinstance(value, Tensor) else Tensor(value)

    def __add__(self, other):
        other = Tensor._lift(other)
        out = Tensor(self.data + other.data,
                     self.requires_grad or other.requires_grad,
                     (self, other))

        def backward(g):
            if self.requires_grad:
                self.grad += _unbroadcast(g, self.shape)
            if other.requires_grad:
                other.grad += _unbroadcast(g, other.shape)

        out._backward = backward
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += -g

        out._backward = backward
        return out

    def __sub__(self, other):
        return self + (-Tensor._lift(other))

    def __rsub__(self, other):
        return Tensor._lift(other) + (-self)

    def __mul__(self, other):
        other = Tensor._lift(other)
        out = Tensor(self.data * other.data,
                     self.requires_grad or other.requires_grad,
                     (self, other))

        def backward(g):
            if self.requires_grad:
                self.grad += _unbroadcast(g * other.data, self.shape)
            if other.requires_grad:
                other.grad += _unbroadcast(g * self.data, other.shape)

        out._backward = backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Tensor._lift(other)
        out = Tensor(self.data / other.data,
                     self.requires_grad or other.requires_grad,
                     (self, other))

        def backward(g):
            if self.requires_grad:
                self.grad += _unbroadcast(g / other.data, self.shape)
            if other.requires_grad:
                other.grad += _unbroadcast(-g * self.data / other.data ** 2,
                                           other.shape)

        out._backward = backward
        return out

    def __pow__(self, exponent):
        assert np.isscalar(exponent)
        out = Tensor(self.data ** exponent, self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += g * exponent * self.data ** (exponent - 1)

        out._backward = backward
        return out

    def __matmul__(self, other):
        other = Tensor._lift(other)
        a, b = self.data, other.data
        if a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
            raise ShapeError(f"matmul inner extents differ: {a.shape} @ {b.shape}")
        out = Tensor(a @ b, self.requires_grad or other.requires_grad,
                     (self, other))

        def backward(g):
            if self.requires_grad:
                ga = g @ np.swapaxes(b, -1, -2) if b.ndim > 1 else np.outer(g, b).reshape(a.shape)
                self.grad += _unbroadcast(ga, a.shape)
            if other.requires_grad:
                gb = np.swapaxes(a, -1, -2) @ g if a.ndim > 1 else np.outer(a, g).reshape(b.shape)
                other.grad += _unbroadcast(gb, b.shape)

        out._backward = backward
        return out

    # -------------------------------------------------------------- reductions

    def sum(self, axis=None, keepdims=False):
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims),
                     self.requires_grad, (self,))

        def backward(g):
            if not self.requires_grad:
                return
            if axis is None:
                self.grad += np.broadcast_to(g, self.shape)
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                self.grad += np.broadcast_to(gg, self.shape)

        out._backward = backward
        return out

    def mean(self, axis=None, keepdims=False):
        n = self.size if axis is None else np.prod(
            [self.shape[a] for a in np.atleast_1d(axis)])
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / float(n))

    # ------------------------------------------------------------ shape fiddling

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = Tensor(self.data.reshape(shape), self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += g.reshape(self.shape)

        out._backward = backward
        return out

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inverse = np.argsort(axes)
        out = Tensor(self.data.transpose(axes), self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += g.transpose(inverse)

        out._backward = backward
        return out

    def swapaxes(self, a, b):
        out = Tensor(np.swapaxes(self.data, a, b), self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += np.swapaxes(g, a, b)

        out._backward = backward
        return out

    def broadcast_to(self, shape):
        out = Tensor(np.broadcast_to(self.data, shape).copy(),
                     self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += _unbroadcast(g, self.shape)

        out._backward = backward
        return out

    def take(self, indices):
        """Gather from the flattened tensor; backward scatter-adds."""
        idx = np.asarray(indices)
        out = Tensor(self.data.reshape(-1)[idx], self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                flat = np.zeros(self.size, dtype=self.data.dtype)
                np.add.at(flat, idx.reshape(-1), g.reshape(-1))
                self.grad += flat.reshape(self.shape)

        out._backward = backward
        return out

    # ------------------------------------------------------------- elementwise

    def exp(self):
        y = np.exp(self.data)
        out = Tensor(y, self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += g * y

        out._backward = backward
        return out

    def log(self):
        out = Tensor(np.log(self.data), self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += g / self.data

        out._backward = backward
        return out

    def sqrt(self):
        y = np.sqrt(self.data)
        out = Tensor(y, self.requires_grad, (self,))

        def backward(g):
            if self.requires_grad:
                self.grad += g * 0.5 / y

        out._backward = backward
        return out

    def maximum(self, other):
        other = Tensor._lift(other)
        out = Tensor(np.maximum(self.data, other.data),
                     self.requires_grad or other.requires_grad,
                     (self, other))
        pick_self = self.data >= other.data

        def backward(g):
            if self.requires_grad:
                self.grad += _unbroadcast(g * pick_self, self.shape)
            if other.requires_grad:
                other.grad += _unbroadcast(g * ~pick_self, other.shape)

        out._backward = backward
        return out

    def clamp(self, lo, hi):
        out = Tensor(np.clip(self.data, lo, hi), self.requires_grad, (self,))
        inside = (self.data > lo) & (self.data < hi)

        def backward(g):
            if self.requires_grad:
                self.grad += g * inside

        out._backward = backward
        return out

    def softplus(self):
        y = np.logaddexp(0.0, self.data)
        out = Tensor(y, self.requires_grad, (self,))
        sig = expit(self.data)

        def backward(g):
            if self.requires_grad:
                self.grad += g * sig

        out._backward = backward
        return out


def concat(tensors, axis=0):
    """Concatenate along `axis`; backward splits the gradient."""
    datas = [t.data for t in tensors]
    out = Tensor(np.concatenate(datas, axis=axis),
                 any(t.requires_grad for t in tensors), tuple(tensors))
    sizes = [d.shape[axis] for d in datas]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                t.grad += g[tuple(sl)]

    out._backward = backward
    return out


def stack(tensors, axis=0):
    return concat([t.reshape(t.shape[:axis] + (1,) + t.shape[axis:])
                   for t in tensors], axis=axis)


def matmul(a, b):
    """Matrix product with shape checking (supports batched operands)."""
    return Tensor._lift(a) @ b
