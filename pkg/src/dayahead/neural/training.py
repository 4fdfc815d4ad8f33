"""Mini-batch training with early stopping, and batch prediction."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigError, DatasetError, NumericError, TrainingError
from ..features import WindowSet, apply_norm, fit_norm, invert_target, normalize_inputs
from . import autodiff as ad
from .models import ARCHITECTURES, ModelParameters, forward, init_params
from .optim import AdamState, clip_global_norm, optimizer_step

log = logging.getLogger(__name__)

MIN_SAMPLES = 10


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    patience: int = 5
    val_fraction: float = 0.1
    fcdnn_hidden: tuple[int, ...] = (64, 64)
    rnn_hidden: int = 64
    clip_norm: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "fcdnn_hidden", tuple(int(h) for h in self.fcdnn_hidden))
        errors = []
        for name in ("epochs", "batch_size", "patience", "rnn_hidden"):
            if getattr(self, name) <= 0:
                errors.append(f"{name} must be positive")
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            errors.append("learning_rate and clip_norm must be positive")
        if not 0 < self.val_fraction < 0.5:
            errors.append("val_fraction must lie in (0, 0.5)")
        if not self.fcdnn_hidden or any(h <= 0 for h in self.fcdnn_hidden):
            errors.append("fcdnn_hidden sizes must be positive")
        if self.seed < 0:
            errors.append("seed must be non-negative")
        if errors:
            raise ConfigError("; ".join(errors))

    def hidden_for(self, architecture: str) -> tuple[int, ...]:
        return self.fcdnn_hidden if architecture == "fcdnn" else (self.rnn_hidden,)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fcdnn_hidden"] = list(self.fcdnn_hidden)
        return d


@dataclass
class TrainTrace:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_val: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0
    n_train: int = 0
    n_val: int = 0

    def summary(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "stopped_epoch": self.stopped_epoch,
            "best_val_mse": self.best_val[-1] if self.best_val else None,
            "n_train": self.n_train,
            "n_val": self.n_val,
        }


def gradients(params: ModelParameters) -> dict[str, np.ndarray]:
    """Current gradients, zeros for parameters the graph did not reach."""
    return {k: (t.grad if t.grad is not None else np.zeros_like(t.data)) for k, t in params.tensors.items()}


def batch_loss(params: ModelParameters, x: np.ndarray, y: np.ndarray) -> ad.Tensor:
    return ad.mse(forward(params, x), y)


def evaluate_mse(params: ModelParameters, x: np.ndarray, y: np.ndarray, batch_size: int = 256) -> float:
    total = 0.0
    with ad.no_grad():
        for a in range(0, len(x), batch_size):
            pred = forward(params, x[a : a + batch_size]).data
            total += float(np.sum((pred - y[a : a + batch_size]) ** 2))
    return total / y.size


def train(architecture: str, windows: WindowSet, cfg: TrainConfig,
          init: Optional[ModelParameters] = None) -> tuple[ModelParameters, TrainTrace]:
    """Fit one forecaster; returns the best-validation parameters and the loss trace."""
    if architecture not in ARCHITECTURES:
        raise ConfigError(f"unknown architecture {architecture!r}; valid: {list(ARCHITECTURES)}")
    n = len(windows)
    if n < MIN_SAMPLES:
        raise DatasetError(f"need at least {MIN_SAMPLES} training windows, got {n}")

    order = np.argsort(windows.target_dates, kind="stable")
    windows = windows.take(order)
    stats = fit_norm(windows)
    scaled = apply_norm(windows, stats)
    n_val = max(1, int(math.ceil(n * cfg.val_fraction)))
    x_tr, y_tr = scaled.inputs[: n - n_val], scaled.targets[: n - n_val]
    x_va, y_va = scaled.inputs[n - n_val :], scaled.targets[n - n_val :]

    rng = np.random.default_rng(cfg.seed)
    params = init_params(architecture, len(windows.channel_names), cfg.hidden_for(architecture), rng)
    if init is not None:
        params.load_arrays(init.arrays())
    params.norm_stats = stats
    values = {k: t.data for k, t in params.tensors.items()}
    state = AdamState()
    trace = TrainTrace(n_train=len(x_tr), n_val=n_val)
    best = (math.inf, params.arrays())
    wait = 0
    for epoch in range(1, cfg.epochs + 1):
        perm = rng.permutation(len(x_tr))
        running = 0.0
        try:
            for a in range(0, len(perm), cfg.batch_size):
                idx = perm[a : a + cfg.batch_size]
                params.zero_grad()
                loss = batch_loss(params, x_tr[idx], y_tr[idx])
                ad.backward(loss)
                grads = gradients(params)
                clip_global_norm(grads, cfg.clip_norm)
                optimizer_step(values, grads, state, lr=cfg.learning_rate)
                running += float(loss.data[0, 0]) * len(idx)
            val = evaluate_mse(params, x_va, y_va)
        except NumericError as e:
            raise TrainingError(f"{architecture} diverged in epoch {epoch}: {e}") from e
        if not math.isfinite(val):
            raise TrainingError(f"{architecture} diverged in epoch {epoch}: validation loss {val}")
        trace.train_loss.append(running / len(x_tr))
        trace.val_loss.append(val)
        if val < best[0]:
            best = (val, params.arrays())
            trace.best_epoch = epoch
            wait = 0
        else:
            wait += 1
        trace.best_val.append(best[0])
        trace.stopped_epoch = epoch
        if wait >= cfg.patience:
            log.debug("%s: early stop at epoch %d (best %d)", architecture, epoch, trace.best_epoch)
            break
    params.load_arrays(best[1])
    params.zero_grad()
    return params, trace


def predict(params: ModelParameters, inputs: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Raw (n, 168, C) windows -> (n, 24) forecasts in target units."""
    if params.norm_stats is None:
        raise ValueError("parameters carry no normalisation statistics")
    x = normalize_inputs(np.asarray(inputs, dtype=np.float64), params.norm_stats)
    if x.ndim == 2:
        x = x[None]
    out = []
    with ad.no_grad():
        for a in range(0, len(x), batch_size):
            out.append(forward(params, x[a : a + batch_size]).data)
    return invert_target(np.concatenate(out), params.norm_stats)
