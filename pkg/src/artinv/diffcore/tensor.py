"""Tensor graph and elementwise/matrix primitives.

A Tensor wraps a float64 ndarray plus, when gradients are required, its
parents and one vector-Jacobian-product closure per parent. ``backward()``
walks the graph in reverse topological order; cycles are impossible by
construction since parents are fixed before a node is ever used.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonFinite, ShapeMismatch


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_vjps")

    def __init__(self, data, parents=(), vjps=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = parents
        self._vjps = vjps

    # Constants never request gradients; Parameter overrides this.
    @property
    def requires_grad(self) -> bool:
        return bool(self._parents)

    @property
    def shape(self):
        return self.data.shape

    def detach(self) -> "Tensor":
        """Same values, cut from the graph."""
        return Tensor(self.data)

    def item(self) -> float:
        return float(self.data)

    def backward(self) -> None:
        """Accumulate gradients of this scalar into every graph leaf."""
        if self.data.size != 1:
            raise ShapeMismatch("backward() needs a scalar loss")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            g = node.grad
            if g is None:
                continue
            for parent, vjp in zip(node._parents, node._vjps):
                if vjp is None:
                    continue
                contrib = vjp(g)
                parent.grad = contrib if parent.grad is None else parent.grad + contrib

    # --- operator sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __getitem__(self, key):
        return take(self, key)


class Parameter(Tensor):
    """Trainable leaf tensor with Adam state."""

    __slots__ = ("trainable", "m", "v", "step")

    def __init__(self, data, trainable=True):
        super().__init__(data)
        self.trainable = trainable
        self.m = np.zeros_like(self.data)
        self.v = np.zeros_like(self.data)
        self.step = 0

    @property
    def requires_grad(self) -> bool:
        return self.trainable


def tensor(data) -> Tensor:
    """Wrap an array as a constant graph leaf."""
    return Tensor(data)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _make(data, pairs) -> Tensor:
    """Build an op result; ``pairs`` is [(parent, vjp or None), ...]."""
    live = [(p, f) for p, f in pairs if isinstance(p, Tensor) and p.requires_grad]
    if not live:
        return Tensor(data)
    return Tensor(data, parents=tuple(p for p, _ in live), vjps=tuple(f for _, f in live))


# --- arithmetic -----------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data
    return _make(out, [
        (a, lambda g: _unbroadcast(g, a.data.shape)),
        (b, lambda g: _unbroadcast(g, b.data.shape)),
    ])


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data
    return _make(out, [
        (a, lambda g: _unbroadcast(g * b.data, a.data.shape)),
        (b, lambda g: _unbroadcast(g * a.data, b.data.shape)),
    ])


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeMismatch(f"matmul expects 2-D operands, got {a.data.shape} @ {b.data.shape}")
    if a.data.shape[1] != b.data.shape[0]:
        raise ShapeMismatch(f"matmul inner dims differ: {a.data.shape} @ {b.data.shape}")
    out = a.data @ b.data
    return _make(out, [
        (a, lambda g: g @ b.data.T),
        (b, lambda g: a.data.T @ g),
    ])


def square(a) -> Tensor:
    a = _as_tensor(a)
    return _make(a.data * a.data, [(a, lambda g: 2.0 * g * a.data)])


def absolute(a) -> Tensor:
    a = _as_tensor(a)
    return _make(np.abs(a.data), [(a, lambda g: g * np.sign(a.data))])


# --- nonlinearities --------------------------------------------------------

def tanh(a) -> Tensor:
    a = _as_tensor(a)
    out = np.tanh(a.data)
    return _make(out, [(a, lambda g: g * (1.0 - out * out))])


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a) -> Tensor:
    a = _as_tensor(a)
    out = stable_sigmoid(a.data)
    return _make(out, [(a, lambda g: g * out * (1.0 - out))])


def relu(a) -> Tensor:
    a = _as_tensor(a)
    return _make(np.maximum(a.data, 0.0), [(a, lambda g: g * (a.data > 0))])


def leaky_relu(a, slope: float = 0.1) -> Tensor:
    a = _as_tensor(a)
    out = np.where(a.data > 0, a.data, slope * a.data)
    return _make(out, [(a, lambda g: g * np.where(a.data > 0, 1.0, slope))])


def exp(a) -> Tensor:
    a = _as_tensor(a)
    out = np.exp(a.data)
    if not np.isfinite(out).all():
        raise NonFinite("exp overflow")
    return _make(out, [(a, lambda g: g * out)])


# --- reductions / shape ------------------------------------------------------

def tsum(a, axis=None) -> Tensor:
    a = _as_tensor(a)
    out = a.data.sum(axis=axis)

    def vjp(g):
        if axis is None:
            return np.full(a.data.shape, float(g))
        return np.broadcast_to(np.expand_dims(g, axis), a.data.shape).copy()

    return _make(out, [(a, vjp)])


def tmean(a, axis=None) -> Tensor:
    a = _as_tensor(a)
    n = a.data.size if axis is None else a.data.shape[axis]
    out = a.data.mean(axis=axis)

    def vjp(g):
        if axis is None:
            return np.full(a.data.shape, float(g) / n)
        return np.broadcast_to(np.expand_dims(g, axis), a.data.shape) / n

    return _make(out, [(a, vjp)])


def concat(parts: list, axis: int = 0) -> Tensor:
    parts = [_as_tensor(p) for p in parts]
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def make_vjp(i):
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(offsets[i], offsets[i + 1])
        sl = tuple(sl)
        return lambda g: g[sl]

    return _make(out, [(p, make_vjp(i)) for i, p in enumerate(parts)])


def take(a, key) -> Tensor:
    a = _as_tensor(a)
    out = a.data[key]

    def vjp(g):
        full = np.zeros_like(a.data)
        full[key] = g
        return full

    return _make(out, [(a, vjp)])
