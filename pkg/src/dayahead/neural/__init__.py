"""Reverse-mode autodiff and the three day-ahead forecasters."""
from .autodiff import Tensor, backward, no_grad
from .checkpoint import load_checkpoint, save_checkpoint
from .models import (
    ARCHITECTURES,
    ModelParameters,
    forward,
    forward_fcdnn,
    forward_rnn,
    init_params,
    loss_mse,
)
from .optim import AdamState, clip_global_norm, optimizer_step
from .training import TrainConfig, TrainTrace, predict, train

__all__ = [
    "ARCHITECTURES", "AdamState", "ModelParameters", "Tensor", "TrainConfig", "TrainTrace", "backward",
    "clip_global_norm", "forward", "forward_fcdnn", "forward_rnn", "init_params", "load_checkpoint", "loss_mse",
    "no_grad", "optimizer_step", "predict", "save_checkpoint", "train",
]
