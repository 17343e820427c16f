"""Dense float64 tensors with reverse-mode automatic differentiation.

Small define-by-run engine sufficient for MLPs with tanh/relu hidden
layers, sigmoid/log losses, and the transport regularizer: affine maps,
matrix products, elementwise tanh/relu/sigmoid/log/exp/negation/clip,
sum, mean, elementwise product, and concatenation. Everything is float64;
every operation checks its output for NaN/Inf and raises `NonFiniteError`
instead of propagating garbage.

A graph instance (the web of `Tensor` nodes built during a forward pass)
is single-threaded; `Tensor.data` arrays are plain numpy and safe to
share read-only.
"""

import itertools

import numpy as np

from .errors import NonFiniteError

_ORDER = itertools.count()


def _check_finite(data, op):
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"non-finite value produced by '{op}'")


def _unbroadcast(grad, shape):
    """Reduce `grad` back to `shape` after numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """A node in the compute graph: value, gradient slot, backward rule."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_order")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None, _op="leaf"):
        self.data = np.asarray(data, dtype=np.float64)
        _check_finite(self.data, _op)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward
        self._order = next(_ORDER)

    @property
    def shape(self):
        return self.data.shape

    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self):
        """Backpropagate from a scalar output to every requires-grad leaf."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output tensor")
        nodes = []
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            nodes.append(node)
            stack.extend(p for p in node._parents if p.requires_grad)
        # Creation order is a topological order; visit it in exact reverse.
        nodes.sort(key=lambda t: t._order, reverse=True)
        self.grad = np.ones_like(self.data)
        for node in nodes:
            if node._backward is not None:
                node._backward(node)

    # -- operators ------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        out = _binary(self, other, self.data + other.data, "add")
        if out._backward is not None:
            def back(o, a=self, b=other):
                if a.requires_grad:
                    a._accumulate(_unbroadcast(o.grad, a.data.shape))
                if b.requires_grad:
                    b._accumulate(_unbroadcast(o.grad, b.data.shape))
            out._backward = back
        return out

    __radd__ = __add__

    def __neg__(self):
        out = _unary(self, -self.data, "neg")
        if out._backward is not None:
            def back(o, a=self):
                a._accumulate(-o.grad)
            out._backward = back
        return out

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        out = _binary(self, other, self.data * other.data, "mul")
        if out._backward is not None:
            def back(o, a=self, b=other):
                if a.requires_grad:
                    a._accumulate(_unbroadcast(o.grad * b.data, a.data.shape))
                if b.requires_grad:
                    b._accumulate(_unbroadcast(o.grad * a.data, b.data.shape))
            out._backward = back
        return out

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, Tensor):
            raise TypeError("division is supported by scalars only")
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        other = as_tensor(other)
        out = _binary(self, other, self.data @ other.data, "matmul")
        if out._backward is not None:
            def back(o, a=self, b=other):
                if a.requires_grad:
                    a._accumulate(o.grad @ b.data.T)
                if b.requires_grad:
                    b._accumulate(a.data.T @ o.grad)
            out._backward = back
        return out

    # -- elementwise ----------------------------------------------------

    def tanh(self):
        y = np.tanh(self.data)
        out = _unary(self, y, "tanh")
        if out._backward is not None:
            def back(o, a=self, y=y):
                a._accumulate(o.grad * (1.0 - y * y))
            out._backward = back
        return out

    def relu(self):
        y = np.maximum(self.data, 0.0)
        out = _unary(self, y, "relu")
        if out._backward is not None:
            def back(o, a=self):
                a._accumulate(o.grad * (a.data > 0.0))
            out._backward = back
        return out

    def sigmoid(self):
        y = np.where(self.data >= 0,
                     1.0 / (1.0 + np.exp(-np.abs(self.data))),
                     np.exp(-np.abs(self.data)) / (1.0 + np.exp(-np.abs(self.data))))
        out = _unary(self, y, "sigmoid")
        if out._backward is not None:
            def back(o, a=self, y=y):
                a._accumulate(o.grad * y * (1.0 - y))
            out._backward = back
        return out

    def exp(self):
        with np.errstate(over="ignore"):
            y = np.exp(self.data)
        out = _unary(self, y, "exp")
        if out._backward is not None:
            def back(o, a=self, y=y):
                a._accumulate(o.grad * y)
            out._backward = back
        return out

    def log(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.log(self.data)
        out = _unary(self, y, "log")
        if out._backward is not None:
            def back(o, a=self):
                a._accumulate(o.grad / a.data)
            out._backward = back
        return out

    def clip(self, low, high):
        """Clamp values; gradient passes through strictly inside the bounds."""
        y = np.clip(self.data, low, high)
        out = _unary(self, y, "clip")
        if out._backward is not None:
            def back(o, a=self, low=low, high=high):
                inside = (a.data > low) & (a.data < high)
                a._accumulate(o.grad * inside)
            out._backward = back
        return out

    # -- reductions / structure -----------------------------------------

    def reshape(self, *shape):
        out = _unary(self, self.data.reshape(*shape), "reshape")
        if out._backward is not None:
            def back(o, a=self):
                a._accumulate(o.grad.reshape(a.data.shape))
            out._backward = back
        return out

    def sum(self, axis=None):
        out = _unary(self, np.sum(self.data, axis=axis), "sum")
        if out._backward is not None:
            def back(o, a=self, axis=axis):
                g = o.grad
                if axis is not None:
                    g = np.expand_dims(g, axis)
                a._accumulate(np.broadcast_to(g, a.data.shape).copy())
            out._backward = back
        return out

    def mean(self, axis=None):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis) / n

    def item(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _unary(a, data, op):
    out = Tensor(data, requires_grad=a.requires_grad, _parents=(a,), _op=op)
    if out.requires_grad:
        out._backward = True  # replaced by the caller
    return out


def _binary(a, b, data, op):
    req = a.requires_grad or b.requires_grad
    out = Tensor(data, requires_grad=req, _parents=(a, b), _op=op)
    if req:
        out._backward = True
    return out


def as_tensor(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data):
    """A leaf tensor that receives gradients (network weights)."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def constant(data):
    """A leaf tensor outside the gradient graph (inputs, detached values)."""
    return Tensor(data, requires_grad=False)


def concat(tensors, axis=0):
    """Concatenate along an axis; backward splits the gradient."""
    datas = [t.data for t in tensors]
    req = any(t.requires_grad for t in tensors)
    out = Tensor(np.concatenate(datas, axis=axis), requires_grad=req,
                 _parents=tuple(tensors), _op="concat")
    if req:
        sizes = [d.shape[axis] for d in datas]
        offsets = np.cumsum([0] + sizes)

        def back(o, tensors=tensors, offsets=offsets, axis=axis):
            for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
                if t.requires_grad:
                    index = [slice(None)] * o.grad.ndim
                    index[axis] = slice(lo, hi)
                    t._accumulate(o.grad[tuple(index)])
        out._backward = back
    return out
