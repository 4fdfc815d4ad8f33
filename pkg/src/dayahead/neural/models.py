"""FCDNN, LSTM and GRU forecasters mapping a (168, C) window to 24 outputs.

All three share one interface: ``forward(params, x)`` with ``x`` shaped
``(batch, steps, channels)`` returns a ``(batch, 24)`` tensor.

Gate layouts (column blocks of the fused weight matrices):

* LSTM: ``[input | forget | output | candidate]``;
  ``c' = f*c + i*g``, ``h' = o*tanh(c')``.
* GRU: ``[reset | update | candidate]``;
  ``n = tanh(x Wn + bn + r*(h Un + bhn))``, ``h' = n + u*(h - n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import NumericError, ShapeError
from ..features import HORIZON_HOURS, INPUT_HOURS, NormStats
from . import autodiff as ad
from .autodiff import Tensor

ARCHITECTURES = ("fcdnn", "lstm", "gru")


@dataclass
class ModelParameters:
    architecture: str
    n_channels: int
    hidden: tuple[int, ...]
    tensors: dict[str, Tensor]
    steps: int = INPUT_HOURS
    outputs: int = HORIZON_HOURS
    norm_stats: Optional[NormStats] = None

    @property
    def n_parameters(self) -> int:
        return sum(t.data.size for t in self.tensors.values())

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: t.data.copy() for k, t in self.tensors.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for k, t in self.tensors.items():
            if arrays[k].shape != t.shape:
                raise ShapeError(f"{k}: {arrays[k].shape} != {t.shape}")
            t.data = np.array(arrays[k], dtype=np.float64)

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.grad = None


def parameter_shapes(architecture: str, n_channels: int, hidden, steps=INPUT_HOURS, outputs=HORIZON_HOURS):
    """name -> (shape, fan_in) in a fixed order."""
    if architecture == "fcdnn":
        shapes, fan = {}, steps * n_channels
        for k, h in enumerate(hidden, start=1):
            shapes[f"W{k}"] = ((fan, h), fan)
            shapes[f"b{k}"] = ((1, h), fan)
            fan = h
        shapes["head_W"] = ((fan, outputs), fan)
        shapes["head_b"] = ((1, outputs), fan)
        return shapes
    if len(hidden) != 1:
        raise ShapeError(f"{architecture} takes a single hidden size, got {hidden}")
    h = hidden[0]
    fan = n_channels + h
    if architecture == "lstm":
        return {
            "Wx": ((n_channels, 4 * h), fan),
            "Wh": ((h, 4 * h), fan),
            "b": ((1, 4 * h), fan),
            "head_W": ((h, outputs), h),
            "head_b": ((1, outputs), h),
        }
    if architecture == "gru":
        return {
            "Wx": ((n_channels, 3 * h), fan),
            "bx": ((1, 3 * h), fan),
            "Wh": ((h, 3 * h), fan),
            "bh": ((1, 3 * h), fan),
            "head_W": ((h, outputs), h),
            "head_b": ((1, outputs), h),
        }
    raise ValueError(f"unknown architecture {architecture!r}; valid: {list(ARCHITECTURES)}")


def init_params(architecture: str, n_channels: int, hidden, rng: Optional[np.random.Generator] = None,
                steps: int = INPUT_HOURS, outputs: int = HORIZON_HOURS) -> ModelParameters:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); all zeros when ``rng`` is None."""
    hidden = tuple(int(h) for h in hidden)
    tensors = {}
    for name, (shape, fan_in) in parameter_shapes(architecture, n_channels, hidden, steps, outputs).items():
        if rng is None:
            data = np.zeros(shape)
        else:
            bound = 1.0 / np.sqrt(fan_in)
            data = rng.uniform(-bound, bound, size=shape)
        tensors[name] = Tensor(data, requires_grad=True)
    return ModelParameters(architecture, n_channels, hidden, tensors, steps, outputs)


def _check_input(params: ModelParameters, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    expected = (params.steps, params.n_channels)
    if x.ndim != 3 or x.shape[1:] != expected:
        raise ShapeError(f"input shape {x.shape[1:] if x.ndim == 3 else x.shape} != expected {expected}")
    return x


def _fcdnn(params: ModelParameters, x: np.ndarray) -> Tensor:
    p = params.tensors
    a = ad.constant(x.reshape(len(x), -1))
    for k in range(1, len(params.hidden) + 1):
        a = ad.tanh(ad.add(ad.matmul(a, p[f"W{k}"]), p[f"b{k}"]))
    return ad.add(ad.matmul(a, p["head_W"]), p["head_b"])


def _time_major(x: np.ndarray) -> Tensor:
    b, t, c = x.shape
    return ad.constant(x.transpose(1, 0, 2).reshape(t * b, c))


def _lstm(params: ModelParameters, x: np.ndarray) -> Tensor:
    p = params.tensors
    batch, steps, _ = x.shape
    h_size = params.hidden[0]
    xp = ad.add(ad.matmul(_time_major(x), p["Wx"]), p["b"])
    hc = ad.constant(np.zeros((batch, 2 * h_size)))
    for t in range(steps):
        try:
            hc = ad.lstm_step(ad.rows(xp, t * batch, (t + 1) * batch), hc, p["Wh"])
        except NumericError as e:
            raise NumericError(f"lstm step {t}: {e}") from e
    h = ad.cols(hc, 0, h_size)
    return ad.add(ad.matmul(h, p["head_W"]), p["head_b"])


def _gru(params: ModelParameters, x: np.ndarray) -> Tensor:
    p = params.tensors
    batch, steps, _ = x.shape
    h_size = params.hidden[0]
    xp = ad.add(ad.matmul(_time_major(x), p["Wx"]), p["bx"])
    h = ad.constant(np.zeros((batch, h_size)))
    for t in range(steps):
        try:
            h = ad.gru_step(ad.rows(xp, t * batch, (t + 1) * batch), h, p["Wh"], p["bh"])
        except NumericError as e:
            raise NumericError(f"gru step {t}: {e}") from e
    return ad.add(ad.matmul(h, p["head_W"]), p["head_b"])


# Same cells spelled out with elementary ops; slower, kept as a cross-check
# for the fused steps above.
def _lstm_composite(params: ModelParameters, x: np.ndarray) -> Tensor:
    p = params.tensors
    batch, steps, _ = x.shape
    h_size = params.hidden[0]
    xp = ad.add(ad.matmul(_time_major(x), p["Wx"]), p["b"])
    h = c = None
    for t in range(steps):
        try:
            z = ad.rows(xp, t * batch, (t + 1) * batch)
            if h is not None:
                z = ad.add(z, ad.matmul(h, p["Wh"]))
            s = ad.sigmoid(ad.cols(z, 0, 3 * h_size))
            g = ad.tanh(ad.cols(z, 3 * h_size, 4 * h_size))
            i = ad.cols(s, 0, h_size)
            o = ad.cols(s, 2 * h_size, 3 * h_size)
            if c is None:
                c = ad.mul(i, g)
            else:
                f = ad.cols(s, h_size, 2 * h_size)
                c = ad.add(ad.mul(f, c), ad.mul(i, g))
            h = ad.mul(o, ad.tanh(c))
        except NumericError as e:
            raise NumericError(f"lstm step {t}: {e}") from e
    return ad.add(ad.matmul(h, p["head_W"]), p["head_b"])


def _gru_composite(params: ModelParameters, x: np.ndarray) -> Tensor:
    p = params.tensors
    batch, steps, _ = x.shape
    h_size = params.hidden[0]
    xp = ad.add(ad.matmul(_time_major(x), p["Wx"]), p["bx"])
    h = ad.constant(np.zeros((batch, h_size)))
    for t in range(steps):
        try:
            xt = ad.rows(xp, t * batch, (t + 1) * batch)
            hp = ad.add(ad.matmul(h, p["Wh"]), p["bh"])
            ru = ad.sigmoid(ad.add(ad.cols(xt, 0, 2 * h_size), ad.cols(hp, 0, 2 * h_size)))
            r = ad.cols(ru, 0, h_size)
            u = ad.cols(ru, h_size, 2 * h_size)
            n = ad.tanh(ad.add(ad.cols(xt, 2 * h_size, 3 * h_size), ad.mul(r, ad.cols(hp, 2 * h_size, 3 * h_size))))
            h = ad.add(n, ad.mul(u, ad.sub(h, n)))
        except NumericError as e:
            raise NumericError(f"gru step {t}: {e}") from e
    return ad.add(ad.matmul(h, p["head_W"]), p["head_b"])


_FORWARD = {"fcdnn": _fcdnn, "lstm": _lstm, "gru": _gru}
_COMPOSITE = {"fcdnn": _fcdnn, "lstm": _lstm_composite, "gru": _gru_composite}


def forward(params: ModelParameters, x: np.ndarray, fused: bool = True) -> Tensor:
    """Batch forward pass: (batch, steps, C) -> (batch, outputs) tensor."""
    table = _FORWARD if fused else _COMPOSITE
    return table[params.architecture](params, _check_input(params, x))


def forward_fcdnn(params: ModelParameters, window: np.ndarray) -> np.ndarray:
    if params.architecture != "fcdnn":
        raise ValueError(f"expected fcdnn parameters, got {params.architecture}")
    with ad.no_grad():
        return forward(params, window).data[0]


def forward_rnn(params: ModelParameters, window: np.ndarray) -> np.ndarray:
    if params.architecture not in ("lstm", "gru"):
        raise ValueError(f"expected lstm/gru parameters, got {params.architecture}")
    with ad.no_grad():
        return forward(params, window).data[0]


def loss_mse(pred, target) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"pred {pred.shape} vs target {target.shape}")
    return float(np.mean((pred - target) ** 2))
