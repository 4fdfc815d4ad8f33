"""Tape-free reverse-mode autodiff over 2-D float64 arrays.

Each op returns a new :class:`Tensor` that remembers its parents and a
closure pushing the output gradient back to them.  :func:`backward` walks the
graph in reverse topological order once; a graph cannot be replayed.
"""
from __future__ import annotations

import contextlib

import numpy as np

from ..errors import NumericError, ShapeError, StateError

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Evaluate without recording parents (inference)."""
    global _GRAD_ENABLED
    prev, _GRAD_ENABLED = _GRAD_ENABLED, False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "parents", "backward_fn", "op", "consumed")

    def __init__(self, data, requires_grad: bool = False, parents=(), backward_fn=None, op: str = "leaf"):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == 1:
            data = data.reshape(1, -1)
        if data.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise NumericError(f"non-finite values produced by {op}")
        self.data = data
        self.grad = None
        self.requires_grad = requires_grad
        self.parents = parents
        self.backward_fn = backward_fn
        self.op = op
        self.consumed = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, op={self.op})"

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    def _accumulate_at(self, key, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad[key] += g


def _finite(x: np.ndarray, op: str) -> None:
    if not np.isfinite(x).all():
        raise NumericError(f"non-finite pre-activation in {op}")


def _node(data, parents, backward_fn, op) -> Tensor:
    track = _GRAD_ENABLED and any(p.requires_grad for p in parents)
    if not track:
        return Tensor(data, op=op)
    return Tensor(data, True, parents, backward_fn, op)


def constant(x) -> Tensor:
    return Tensor(x)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def back(g):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    return _node(out, (a, b), back, "matmul")


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    if g.shape == shape:
        return g
    if shape[0] == 1 and g.shape[1] == shape[1]:
        return g.sum(axis=0, keepdims=True)
    raise ShapeError(f"cannot reduce gradient {g.shape} to {shape}")


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape:
        return
    if b.shape[0] == 1 and a.shape[1] == b.shape[1]:
        return
    if a.shape[0] == 1 and a.shape[1] == b.shape[1]:
        return
    raise ShapeError(f"{op} {a.shape} with {b.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; a (1, n) operand broadcasts over rows (bias)."""
    _check_broadcast(a, b, "add")
    out = a.data + b.data

    def back(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    return _node(out, (a, b), back, "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "sub")
    out = a.data - b.data

    def back(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g, b.shape))

    return _node(out, (a, b), back, "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "mul")
    out = a.data * b.data

    def back(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    return _node(out, (a, b), back, "mul")


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)

    def back(g):
        a._accumulate(g * (1.0 - out * out))

    return _node(out, (a,), back, "tanh")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sigmoid(a: Tensor) -> Tensor:
    out = _sigmoid(a.data)

    def back(g):
        a._accumulate(g * out * (1.0 - out))

    return _node(out, (a,), back, "sigmoid")


def rows(a: Tensor, start: int, stop: int) -> Tensor:
    out = a.data[start:stop]

    def back(g):
        a._accumulate_at(np.s_[start:stop], g)

    return _node(out, (a,), back, "rows")


def cols(a: Tensor, start: int, stop: int) -> Tensor:
    out = a.data[:, start:stop]

    def back(g):
        a._accumulate_at(np.s_[:, start:stop], g)

    return _node(out, (a,), back, "cols")


def mse(pred: Tensor, target) -> Tensor:
    """Mean of squared differences over every element; returns a (1, 1) tensor."""
    target = np.asarray(target, dtype=np.float64).reshape(pred.shape)
    diff = pred.data - target
    out = np.array([[np.mean(diff * diff)]])

    def back(g):
        pred._accumulate(g * 2.0 * diff / diff.size)

    return _node(out, (pred,), back, "mse")


def lstm_step(x_t: Tensor, hc: Tensor, w_h: Tensor) -> Tensor:
    """One fused LSTM step.

    ``x_t`` holds the input projection (bias included) for the four gates,
    ``hc`` is ``[h | c]`` of the previous step.  Returns the new ``[h | c]``.
    """
    n_h = w_h.shape[0]
    if hc.shape != (x_t.shape[0], 2 * n_h) or x_t.shape[1] != 4 * n_h or w_h.shape[1] != 4 * n_h:
        raise ShapeError(f"lstm_step x={x_t.shape} hc={hc.shape} Wh={w_h.shape}")
    h_prev, c_prev = hc.data[:, :n_h], hc.data[:, n_h:]
    with np.errstate(over="ignore", invalid="ignore"):
        z = x_t.data + h_prev @ w_h.data
    _finite(z, "lstm_step")
    s = _sigmoid(z[:, : 3 * n_h])
    i, f, o = s[:, :n_h], s[:, n_h : 2 * n_h], s[:, 2 * n_h :]
    g = np.tanh(z[:, 3 * n_h :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    out = np.concatenate([h, c], axis=1)

    def back(grad):
        gh, gc = grad[:, :n_h], grad[:, n_h:]
        dc = gc + gh * o * (1.0 - tc * tc)
        dz = np.concatenate(
            [dc * g * i * (1.0 - i), dc * c_prev * f * (1.0 - f), gh * tc * o * (1.0 - o), dc * i * (1.0 - g * g)],
            axis=1,
        )
        if x_t.requires_grad:
            x_t._accumulate(dz)
        if w_h.requires_grad:
            w_h._accumulate(h_prev.T @ dz)
        if hc.requires_grad:
            hc._accumulate(np.concatenate([dz @ w_h.data.T, dc * f], axis=1))

    return _node(out, (x_t, hc, w_h), back, "lstm_step")


def gru_step(x_t: Tensor, h: Tensor, w_h: Tensor, b_h: Tensor) -> Tensor:
    """One fused GRU step; ``x_t`` is the [reset | update | candidate] input projection."""
    n_h = w_h.shape[0]
    if h.shape != (x_t.shape[0], n_h) or x_t.shape[1] != 3 * n_h or w_h.shape[1] != 3 * n_h:
        raise ShapeError(f"gru_step x={x_t.shape} h={h.shape} Wh={w_h.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        hp = h.data @ w_h.data + b_h.data
    _finite(hp, "gru_step")
    xp = x_t.data
    ru = _sigmoid(xp[:, : 2 * n_h] + hp[:, : 2 * n_h])
    r, u = ru[:, :n_h], ru[:, n_h:]
    hn = hp[:, 2 * n_h :]
    n = np.tanh(xp[:, 2 * n_h :] + r * hn)
    out = n + u * (h.data - n)

    def back(grad):
        dn = grad * (1.0 - u) * (1.0 - n * n)
        dr = dn * hn * r * (1.0 - r)
        du = grad * (h.data - n) * u * (1.0 - u)
        dxp = np.concatenate([dr, du, dn], axis=1)
        dhp = np.concatenate([dr, du, dn * r], axis=1)
        if x_t.requires_grad:
            x_t._accumulate(dxp)
        if w_h.requires_grad:
            w_h._accumulate(h.data.T @ dhp)
        if b_h.requires_grad:
            b_h._accumulate(dhp.sum(axis=0, keepdims=True))
        if h.requires_grad:
            h._accumulate(grad * u + dhp @ w_h.data.T)

    return _node(out, (x_t, h, w_h, b_h), back, "gru_step")


def _topo(root: Tensor) -> list[Tensor]:
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` on every leaf reachable from a scalar ``loss``."""
    if loss.shape != (1, 1):
        raise ShapeError(f"backward needs a scalar loss, got {loss.shape}")
    if loss.consumed:
        raise StateError("graph already used for backward; run a fresh forward pass")
    if not loss.requires_grad:
        return
    order = _topo(loss)
    loss.grad = np.ones((1, 1))
    for node in reversed(order):
        if node.backward_fn is not None and node.grad is not None:
            node.backward_fn(node.grad)
        if node.parents:
            # interior nodes: free memory and block replay
            node.grad = None
            node.consumed = True
            node.backward_fn = None
