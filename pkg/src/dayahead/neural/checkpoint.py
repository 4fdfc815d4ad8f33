"""Model checkpoints as ``.npz`` archives.

Layout: ``meta`` (UTF-8 JSON bytes: format version, architecture, shapes,
channel names, train config), ``param/<name>`` float64 tensors and
``norm/{mean,sd,constant}``.  float64 arrays round-trip bit-exactly.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ReportError
from ..features import NormStats
from .autodiff import Tensor
from .models import ModelParameters

FORMAT_VERSION = 1


def save_checkpoint(path, params: ModelParameters, config: Optional[dict] = None) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "architecture": params.architecture,
        "n_channels": params.n_channels,
        "hidden": list(params.hidden),
        "steps": params.steps,
        "outputs": params.outputs,
        "tensor_names": list(params.tensors),
        "config": config or {},
    }
    arrays = {f"param/{k}": t.data for k, t in params.tensors.items()}
    stats = params.norm_stats
    if stats is not None:
        meta["channel_names"] = list(stats.channel_names)
        meta["target_index"] = stats.target_index
        arrays.update({"norm/mean": stats.mean, "norm/sd": stats.sd, "norm/constant": stats.constant})
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[ModelParameters, dict]:
    with np.load(Path(path), allow_pickle=False) as z:
        meta = json.loads(z["meta"].tobytes().decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ReportError(f"{path}: unsupported checkpoint version {meta.get('format_version')!r}")
        tensors = {k: Tensor(z[f"param/{k}"], requires_grad=True) for k in meta["tensor_names"]}
        stats = None
        if "norm/mean" in z.files:
            stats = NormStats(tuple(meta["channel_names"]), z["norm/mean"], z["norm/sd"], z["norm/constant"],
                              meta["target_index"])
    params = ModelParameters(meta["architecture"], meta["n_channels"], tuple(meta["hidden"]), tensors,
                             meta["steps"], meta["outputs"], stats)
    return params, meta["config"]
