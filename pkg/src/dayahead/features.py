"""Data preparation: exogenous alignment, regime splits, windows, scaling."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DatasetError, RangeError
from .ingest import DataBundle
from .series import (
    DAY,
    HOUR,
    AlignedDataset,
    DailySeries,
    HourlySeries,
    align,
    hour,
    hours_between,
    weekday_numbers,
)

INPUT_HOURS = 168
HORIZON_HOURS = 24
FEATURE_SETS = ("weather", "covid", "mobility")


def shift_weather(w: HourlySeries) -> HourlySeries:
    """Delay by one day so each hour carries yesterday's reading (day-ahead forecast proxy)."""
    if len(w) <= HORIZON_HOURS:
        raise RangeError(f"{w.name}: need more than 24 hours to shift, got {len(w)}")
    return HourlySeries(w.name, w.start + DAY, w.values[:-HORIZON_HOURS])


def upsample_daily(d: DailySeries) -> HourlySeries:
    if len(d) == 0:
        raise RangeError(f"{d.name}: empty daily series")
    return HourlySeries(d.name, hour(d.start_date), np.repeat(d.values, HORIZON_HOURS))


def zero_fill_prefix(s: HourlySeries, full_start) -> HourlySeries:
    full_start = hour(full_start)
    if full_start > s.start:
        raise RangeError(f"{s.name}: full_start {full_start} is after series start {s.start}")
    pad = np.zeros(hours_between(full_start, s.start))
    return HourlySeries(s.name, full_start, np.concatenate([pad, s.values]))


def build_dataset(bundle: DataBundle, features: Sequence[str]) -> AlignedDataset:
    """Load plus the requested exogenous groups, on a common hourly grid.

    Weather is shifted by 24 h; covid/mobility are repeated per hour and
    zero-filled back to the load start.
    """
    unknown = sorted(set(features) - set(FEATURE_SETS))
    if unknown:
        raise ValueError(f"unknown feature groups {unknown}; valid: {list(FEATURE_SETS)}")
    channels = [bundle.load]
    for group in FEATURE_SETS:
        if group not in features:
            continue
        if group == "weather":
            channels += [shift_weather(w) for w in bundle.weather]
            continue
        for d in getattr(bundle, group):
            up = upsample_daily(d)
            if up.start > bundle.load.start:
                up = zero_fill_prefix(up, bundle.load.start)
            channels.append(up)
    return align(channels, bundle.load.name)


@dataclass(frozen=True)
class SplitConfig:
    stay_at_home: np.datetime64 = np.datetime64("2020-03-22T00", "h")
    train_start: Optional[np.datetime64] = None
    horizon_weeks: int = 10

    def __post_init__(self):
        object.__setattr__(self, "stay_at_home", hour(self.stay_at_home))
        if self.train_start is not None:
            object.__setattr__(self, "train_start", hour(self.train_start))
            if self.train_start >= self.stay_at_home:
                raise ValueError("train_start must precede stay_at_home")
        if self.horizon_weeks < 1:
            raise ValueError("horizon_weeks must be >= 1")

    @property
    def post_end(self) -> np.datetime64:
        return self.stay_at_home + self.horizon_weeks * INPUT_HOURS * HOUR

    def cutoff(self, tau: int) -> np.datetime64:
        """End of post-period week ``tau`` (``tau = 0`` is the order itself)."""
        return self.stay_at_home + tau * INPUT_HOURS * HOUR


def split_pre_post(ds: AlignedDataset, cfg: SplitConfig) -> tuple[AlignedDataset, AlignedDataset]:
    if not ds.start <= cfg.stay_at_home < ds.end:
        raise RangeError(f"stay_at_home {cfg.stay_at_home} outside data range [{ds.start}, {ds.end})")
    if cfg.post_end > ds.end:
        raise RangeError(
            f"post window needs data until {cfg.post_end} but data ends at {ds.end} (exclusive)"
        )
    start = ds.start if cfg.train_start is None else max(ds.start, cfg.train_start)
    return ds.between(start, cfg.stay_at_home), ds.between(cfg.stay_at_home, cfg.post_end)


def filter_weekends(ds: AlignedDataset) -> AlignedDataset:
    return ds.take(weekday_numbers(ds.index) >= 5)


@dataclass(frozen=True)
class WindowSet:
    """Supervised samples: (168, C) input blocks and the 24 target loads that follow."""

    inputs: np.ndarray  # (n, 168, C)
    targets: np.ndarray  # (n, 24)
    target_dates: np.ndarray  # (n,) datetime64[D]
    input_times: np.ndarray  # (n, 168) datetime64[h]
    channel_names: tuple[str, ...]
    target_index: int = 0

    def __post_init__(self):
        n = len(self.inputs)
        if not (len(self.targets) == len(self.target_dates) == len(self.input_times) == n):
            raise ValueError("inputs, targets and target_dates must have equal length")
        if n and (self.inputs.shape[1] != INPUT_HOURS or self.targets.shape[1] != HORIZON_HOURS):
            raise ValueError(f"bad window shapes {self.inputs.shape}, {self.targets.shape}")

    def __len__(self) -> int:
        return len(self.inputs)

    def take(self, idx) -> "WindowSet":
        return WindowSet(
            self.inputs[idx], self.targets[idx], self.target_dates[idx], self.input_times[idx],
            self.channel_names, self.target_index,
        )

    @property
    def last_input_time(self) -> np.ndarray:
        return self.input_times.max(axis=1)


def concat_windows(sets: Sequence[WindowSet]) -> WindowSet:
    sets = [s for s in sets if len(s)]
    if not sets:
        raise DatasetError("no windows to concatenate")
    names = {s.channel_names for s in sets}
    if len(names) != 1:
        raise DatasetError(f"window sets disagree on channels: {names}")
    out = WindowSet(
        np.concatenate([s.inputs for s in sets]),
        np.concatenate([s.targets for s in sets]),
        np.concatenate([s.target_dates for s in sets]),
        np.concatenate([s.input_times for s in sets]),
        sets[0].channel_names,
        sets[0].target_index,
    )
    return out.take(np.argsort(out.target_dates, kind="stable"))


def _full_days(ds: AlignedDataset) -> tuple[np.ndarray, np.ndarray]:
    """Calendar days with all 24 hours present, and the row of each day's midnight."""
    hod = (ds.index - ds.index.astype("datetime64[D]")).astype(np.int64)
    starts = np.flatnonzero(hod == 0)
    ok = starts + 23 < len(ds.index)
    starts = starts[ok]
    ok = (ds.index[starts + 23] - ds.index[starts]) == 23 * HOUR
    starts = starts[ok]
    return ds.index[starts].astype("datetime64[D]"), starts


def build_windows(ds: AlignedDataset, weekend_pairing: bool = False) -> WindowSet:
    """One sample per complete target day.

    Without pairing the input is the contiguous 168 h before the target day.
    With pairing (weekend-only data) the input is the 7 most recent complete
    weekend days before it, concatenated chronologically.
    """
    names = tuple(ds.channel_names)
    tgt = names.index(ds.target_name)
    mat = ds.matrix()
    days, starts = _full_days(ds)
    rows_in, rows_out, dates = [], [], []
    if weekend_pairing:
        keep = weekday_numbers(days) >= 5
        days, starts = days[keep], starts[keep]
        for j in range(7, len(days)):
            prior = starts[j - 7 : j]
            rows_in.append(np.concatenate([np.arange(s, s + 24) for s in prior]))
            rows_out.append(np.arange(starts[j], starts[j] + 24))
            dates.append(days[j])
    else:
        for d, s in zip(days, starts):
            a = s - INPUT_HOURS
            if a < 0 or ds.index[s] - ds.index[a] != INPUT_HOURS * HOUR:
                continue  # history incomplete
            rows_in.append(np.arange(a, s))
            rows_out.append(np.arange(s, s + 24))
            dates.append(d)
    if not rows_in:
        raise DatasetError(f"no complete windows in {len(ds)} rows (pairing={weekend_pairing})")
    rin, rout = np.array(rows_in), np.array(rows_out)
    return WindowSet(
        inputs=mat[rin],
        targets=mat[rout, tgt],
        target_dates=np.array(dates, dtype="datetime64[D]"),
        input_times=ds.index[rin],
        channel_names=names,
        target_index=tgt,
    )


def window_for_day(ds: AlignedDataset, target_day) -> np.ndarray:
    """The contiguous (168, C) history block preceding ``target_day``."""
    t0 = hour(np.datetime64(target_day, "D"))
    i = int(np.searchsorted(ds.index, t0))
    a = i - INPUT_HOURS
    if a < 0 or i > len(ds.index) or ds.index[i - 1] != t0 - HOUR or ds.index[a] != t0 - INPUT_HOURS * HOUR:
        raise RangeError(f"no complete 168h history before {target_day}")
    return ds.matrix()[a:i]


@dataclass(frozen=True)
class NormStats:
    channel_names: tuple[str, ...]
    mean: np.ndarray
    sd: np.ndarray
    constant: np.ndarray  # bool flags: sd was zero and replaced by 1.0
    target_index: int = 0

    @property
    def target_mean(self) -> float:
        return float(self.mean[self.target_index])

    @property
    def target_sd(self) -> float:
        return float(self.sd[self.target_index])


def fit_norm(ws: WindowSet) -> NormStats:
    flat = ws.inputs.reshape(-1, ws.inputs.shape[-1])
    mean = flat.mean(axis=0)
    sd = flat.std(axis=0)
    constant = sd <= 1e-12 * np.maximum(1.0, np.abs(mean))
    sd = np.where(constant, 1.0, sd)
    return NormStats(ws.channel_names, mean, sd, constant, ws.target_index)


def normalize_inputs(x: np.ndarray, stats: NormStats) -> np.ndarray:
    return (x - stats.mean) / stats.sd


def apply_norm(ws: WindowSet, stats: NormStats) -> WindowSet:
    if ws.channel_names != stats.channel_names:
        raise ValueError(f"channels {ws.channel_names} != stats channels {stats.channel_names}")
    return WindowSet(
        normalize_inputs(ws.inputs, stats),
        (ws.targets - stats.target_mean) / stats.target_sd,
        ws.target_dates,
        ws.input_times,
        ws.channel_names,
        ws.target_index,
    )


def invert_target(pred: np.ndarray, stats: NormStats) -> np.ndarray:
    return np.asarray(pred) * stats.target_sd + stats.target_mean
