"""Benchmark, weekend-trained and rolling forecast experiments.

All scenarios forecast the same post-order days: ``horizon_weeks * 7`` days
starting at ``split.stay_at_home``.

* benchmark: train once on every pre-order day, forecast day-ahead.
* weekend: train once on pre-order weekend days (pseudo-week inputs),
  forecast day-ahead.
* rolling: week 1 uses the weekend model; for week ``tau + 1`` the model is
  retrained on weekend windows plus post-order days before ``cutoff(tau)``
  and the whole week is forecast from data strictly before that cutoff (the
  load channel is rolled forward with the model's own forecasts, exogenous
  channels repeat the last observed week).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, LeakageError, RangeError
from .features import (
    FEATURE_SETS,
    HORIZON_HOURS,
    INPUT_HOURS,
    SplitConfig,
    WindowSet,
    build_dataset,
    build_windows,
    concat_windows,
    filter_weekends,
    split_pre_post,
    window_for_day,
)
from .ingest import DataBundle
from .neural.models import ARCHITECTURES, ModelParameters
from .neural.training import TrainConfig, predict, train
from .report import ScenarioReport, assemble_report
from .series import HOUR, AlignedDataset, hour

KINDS = ("benchmark", "weekend", "rolling")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "benchmark"
    architecture: str = "lstm"
    features: tuple[str, ...] = ("weather",)
    split: SplitConfig = field(default_factory=SplitConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    warm_start: bool = False

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(f for f in FEATURE_SETS if f in self.features))
        errors = validate_scenario_fields(self.kind, self.architecture, self.features)
        if errors:
            raise ConfigError("; ".join(errors))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "architecture": self.architecture,
            "features": list(self.features),
            "split": {
                "stay_at_home": str(self.split.stay_at_home),
                "train_start": None if self.split.train_start is None else str(self.split.train_start),
                "horizon_weeks": self.split.horizon_weeks,
            },
            "train": self.train.to_dict(),
            "warm_start": self.warm_start,
        }


def validate_scenario_fields(kind, architecture, features) -> list[str]:
    errors = []
    if kind not in KINDS:
        errors.append(f"unknown scenario kind {kind!r}; valid kinds: {', '.join(KINDS)}")
    if architecture not in ARCHITECTURES:
        errors.append(f"unknown architecture {architecture!r}; valid: {', '.join(ARCHITECTURES)}")
    bad = [f for f in features if f not in FEATURE_SETS]
    if bad:
        errors.append(f"unknown features {bad}; valid: {', '.join(FEATURE_SETS)}")
    if kind in ("benchmark", "weekend") and any(f in ("covid", "mobility") for f in features):
        errors.append(f"covid/mobility features need the rolling scenario (got kind={kind!r})")
    return errors


def fingerprint(cfg: ScenarioConfig, ds: AlignedDataset) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(cfg.to_dict(), sort_keys=True).encode())
    h.update(ds.index.astype(np.int64).tobytes())
    for name in ds.channel_names:
        h.update(name.encode())
        h.update(ds.channels[name].tobytes())
    return h.hexdigest()


def forecast_days(split: SplitConfig) -> np.ndarray:
    start = np.datetime64(split.stay_at_home, "D")
    return start + np.arange(7 * split.horizon_weeks).astype("timedelta64[D]")


def _day_actuals(ds: AlignedDataset, days) -> np.ndarray:
    out = []
    for d in days:
        t0 = hour(d)
        i = int(np.searchsorted(ds.index, t0))
        if i + 24 > len(ds.index) or ds.index[i] != t0 or ds.index[i + 23] != t0 + 23 * HOUR:
            raise RangeError(f"no complete actuals for {d}")
        out.append(ds.target[i : i + 24])
    return np.array(out)


def _day_ahead(params: ModelParameters, ds: AlignedDataset, days) -> np.ndarray:
    inputs = np.stack([window_for_day(ds, d) for d in days])
    return predict(params, inputs)


def seasonal_naive(ds: AlignedDataset, target_day) -> np.ndarray:
    """Forecast a day with the load observed exactly one week earlier."""
    d = np.datetime64(target_day, "D")
    try:
        return _day_actuals(ds, [d - np.timedelta64(7, "D")])[0]
    except RangeError:
        raise RangeError(f"seasonal naive for {d} needs complete load on {d - np.timedelta64(7, 'D')}") from None


def _report(cfg: ScenarioConfig, ds: AlignedDataset, days, forecasts, traces, kind=None, blind=()) -> ScenarioReport:
    return assemble_report(
        forecasts,
        _day_actuals(ds, days),
        days,
        kind=kind or cfg.kind,
        architecture=cfg.architecture,
        features=cfg.features,
        seed=cfg.train.seed,
        fingerprint=fingerprint(cfg, ds),
        feature_blind_weeks=blind,
        traces=traces,
        config=cfg.to_dict(),
    )


def _check_dataset(ds: AlignedDataset, cfg: ScenarioConfig) -> None:
    expected = 1 + sum({"weather": 4, "covid": 2, "mobility": 2}[f] for f in cfg.features)
    if len(ds.channel_names) != expected:
        raise ConfigError(f"dataset has channels {ds.channel_names}, scenario features {list(cfg.features)}")
    if not ds.is_contiguous:
        raise RangeError("scenario datasets must be gap-free")
    split_pre_post(ds, cfg.split)  # range checks


def weekend_windows(pre: AlignedDataset) -> WindowSet:
    return build_windows(filter_weekends(pre), weekend_pairing=True)


def run_benchmark(ds: AlignedDataset, cfg: ScenarioConfig) -> ScenarioReport:
    if cfg.kind != "benchmark":
        raise ConfigError(f"run_benchmark needs kind='benchmark', got {cfg.kind!r}")
    _check_dataset(ds, cfg)
    pre, _ = split_pre_post(ds, cfg.split)
    params, trace = train(cfg.architecture, build_windows(pre), cfg.train)
    days = forecast_days(cfg.split)
    return _report(cfg, ds, days, _day_ahead(params, ds, days), [{"week": 0, **trace.summary()}])


def run_pre_selftest(ds: AlignedDataset, cfg: ScenarioConfig) -> ScenarioReport:
    """Benchmark model evaluated on the last ``horizon_weeks`` before the order.

    Training uses only pre-order days preceding that test block.
    """
    _check_dataset(ds, cfg)
    pre, _ = split_pre_post(ds, cfg.split)
    test_start = cfg.split.stay_at_home - cfg.split.horizon_weeks * INPUT_HOURS * HOUR
    if test_start <= pre.start:
        raise RangeError(f"pre-period too short for a {cfg.split.horizon_weeks}-week self-test")
    params, trace = train(cfg.architecture, build_windows(pre.between(pre.start, test_start)), cfg.train)
    days = forecast_days(replace(cfg.split, stay_at_home=test_start))
    return _report(cfg, ds, days, _day_ahead(params, ds, days), [{"week": 0, **trace.summary()}],
                   kind="benchmark-selftest")


def run_weekend(ds: AlignedDataset, cfg: ScenarioConfig) -> ScenarioReport:
    if cfg.kind != "weekend":
        raise ConfigError(f"run_weekend needs kind='weekend', got {cfg.kind!r}")
    _check_dataset(ds, cfg)
    pre, _ = split_pre_post(ds, cfg.split)
    params, trace = train(cfg.architecture, weekend_windows(pre), cfg.train)
    days = forecast_days(cfg.split)
    return _report(cfg, ds, days, _day_ahead(params, ds, days), [{"week": 0, **trace.summary()}])


def rolling_training_windows(ds: AlignedDataset, cfg: ScenarioConfig, tau: int) -> WindowSet:
    """Weekend pseudo-week windows plus post-order days before ``cutoff(tau)``."""
    cutoff = cfg.split.cutoff(tau)
    start = ds.start if cfg.split.train_start is None else max(ds.start, cfg.split.train_start)
    sets = [weekend_windows(ds.between(start, cfg.split.stay_at_home))]
    if tau > 0:
        post_known = build_windows(ds.between(ds.start, cutoff))
        keep = post_known.target_dates >= np.datetime64(cfg.split.stay_at_home, "D")
        sets.append(post_known.take(keep))
    ws = concat_windows(sets)
    _guard_leakage(ws, cutoff)
    return ws


def _guard_leakage(ws: WindowSet, cutoff: np.datetime64) -> None:
    last_target = hour(ws.target_dates.max()) + 23 * HOUR
    if ws.last_input_time.max() >= cutoff or last_target >= cutoff:
        raise LeakageError(f"training windows reach {max(ws.last_input_time.max(), last_target)} >= cutoff {cutoff}")


def roll_forward(params: ModelParameters, known: AlignedDataset, n_days: int = 7) -> np.ndarray:
    """Forecast ``n_days`` whole days after the end of ``known``.

    Load beyond the cutoff comes from the model's own forecasts; exogenous
    channels repeat their value from one week earlier.
    """
    if len(known) < INPUT_HOURS or known.index[-1] - known.index[-INPUT_HOURS] != (INPUT_HOURS - 1) * HOUR:
        raise RangeError("need 168 contiguous hours before the cutoff")
    if (known.end - np.datetime64(known.end, "D")) != np.timedelta64(0, "h"):
        raise RangeError(f"cutoff {known.end} is not at midnight")
    tgt = known.channel_names.index(known.target_name)
    hist = known.matrix()[-INPUT_HOURS:]
    out = []
    for _ in range(n_days):
        pred = predict(params, hist[-INPUT_HOURS:][None])[0]
        new_day = hist[-INPUT_HOURS : -INPUT_HOURS + HORIZON_HOURS].copy()
        new_day[:, tgt] = pred
        hist = np.vstack([hist, new_day])
        out.append(pred)
    return np.array(out)


def forecast_rolling_week(ds: AlignedDataset, cfg: ScenarioConfig, tau: int,
                          init: Optional[ModelParameters] = None) -> tuple[np.ndarray, ModelParameters, dict]:
    """Retrain at ``cutoff(tau)`` and forecast post-order week ``tau + 1``.

    Only rows before the cutoff are ever handed to training or to the
    forecaster, so data at or after it cannot influence the result.
    """
    if not 0 <= tau < cfg.split.horizon_weeks:
        raise RangeError(f"tau must lie in [0, {cfg.split.horizon_weeks}), got {tau}")
    cutoff = cfg.split.cutoff(tau)
    known = ds.between(ds.start, cutoff)
    params, trace = train(cfg.architecture, rolling_training_windows(known, cfg, tau), cfg.train, init=init)
    return roll_forward(params, known), params, {"week": tau + 1, **trace.summary()}


def run_rolling(ds: AlignedDataset, cfg: ScenarioConfig) -> ScenarioReport:
    if cfg.kind != "rolling":
        raise ConfigError(f"run_rolling needs kind='rolling', got {cfg.kind!r}")
    _check_dataset(ds, cfg)
    weeks, traces, prev = [], [], None
    for tau in range(cfg.split.horizon_weeks):
        fc, params, trace = forecast_rolling_week(ds, cfg, tau, init=prev if cfg.warm_start else None)
        weeks.append(fc)
        traces.append(trace)
        prev = params
    days = forecast_days(cfg.split)
    # covid/mobility are all-zero in week-1 training data
    blind = [1] if set(cfg.features) & {"covid", "mobility"} else []
    return _report(cfg, ds, days, np.concatenate(weeks), traces, blind=blind)


def seasonal_naive_report(ds: AlignedDataset, split: SplitConfig) -> ScenarioReport:
    days = forecast_days(split)
    fc = np.array([seasonal_naive(ds, d) for d in days])
    return assemble_report(fc, _day_actuals(ds, days), days, kind="seasonal-naive", architecture="naive")


RUNNERS = {"benchmark": run_benchmark, "weekend": run_weekend, "rolling": run_rolling}


def run_scenario(data, cfg: ScenarioConfig) -> ScenarioReport:
    """Run ``cfg`` on a :class:`DataBundle` or a prepared dataset."""
    ds = build_dataset(data, cfg.features) if isinstance(data, DataBundle) else data
    return RUNNERS[cfg.kind](ds, cfg)
