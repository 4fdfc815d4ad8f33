"""Hourly/daily series containers and alignment.

Timestamps are ``numpy.datetime64`` values at hour resolution, read as naive
wall-clock hours in a fixed offset (no DST arithmetic).  Intervals are
half-open everywhere.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlignmentError, ConfigError, DataQualityError, RangeError

HOUR = np.timedelta64(1, "h")
DAY = np.timedelta64(24, "h")


def hour(ts) -> np.datetime64:
    """Coerce a string / datetime / datetime64 to an hour-resolution timestamp."""
    out = np.datetime64(ts, "h")
    if np.isnat(out):
        raise ValueError(f"not a timestamp: {ts!r}")
    return out


def day(ts) -> np.datetime64:
    return np.datetime64(ts, "D")


def hours_between(a, b) -> int:
    return int((hour(b) - hour(a)) / HOUR)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("series values must be one-dimensional")
    arr.setflags(write=False)
    return arr


class Weekday(enum.IntEnum):
    MONDAY = 0
    TUESDAY = 1
    WEDNESDAY = 2
    THURSDAY = 3
    FRIDAY = 4
    SATURDAY = 5
    SUNDAY = 6


def day_of_week(ts) -> Weekday:
    # 1970-01-01 was a Thursday.
    days = int(np.datetime64(ts, "D").astype(np.int64))
    return Weekday((days + 3) % 7)


def weekday_numbers(index: np.ndarray) -> np.ndarray:
    """Vectorised ``day_of_week`` (Monday=0) for an array of datetime64."""
    days = index.astype("datetime64[D]").astype(np.int64)
    return (days + 3) % 7


def is_weekend(ts) -> bool:
    return day_of_week(ts) >= Weekday.SATURDAY


@dataclass(frozen=True)
class HourlySeries:
    name: str
    start: np.datetime64
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "start", hour(self.start))
        values = _frozen(self.values)
        if not np.isfinite(values).all():
            raise DataQualityError(f"{self.name}: non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> np.datetime64:
        """Exclusive end timestamp."""
        return self.start + len(self.values) * HOUR

    @property
    def index(self) -> np.ndarray:
        return self.start + np.arange(len(self.values)) * HOUR

    def at(self, ts) -> float:
        i = hours_between(self.start, ts)
        if not 0 <= i < len(self.values):
            raise RangeError(f"{self.name}: {hour(ts)} outside [{self.start}, {self.end})")
        return float(self.values[i])


@dataclass(frozen=True)
class DailySeries:
    name: str
    start_date: np.datetime64
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "start_date", day(self.start_date))
        values = _frozen(self.values)
        if not np.isfinite(values).all():
            raise DataQualityError(f"{self.name}: non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_date(self) -> np.datetime64:
        return self.start_date + np.timedelta64(len(self.values), "D")


def slice_series(series: HourlySeries, start, stop) -> HourlySeries:
    """Half-open sub-series ``[start, stop)``."""
    start, stop = hour(start), hour(stop)
    if start > stop:
        raise RangeError(f"from {start} is after to {stop}")
    if start < series.start:
        raise RangeError(f"from {start} precedes series start {series.start}")
    if stop > series.end:
        raise RangeError(f"to {stop} is past series end {series.end}")
    i = hours_between(series.start, start)
    j = hours_between(series.start, stop)
    return HourlySeries(series.name, start, series.values[i:j])


TARGET = "target"
EXOGENOUS = "exogenous"


@dataclass(frozen=True)
class AlignedDataset:
    """Multi-channel hourly table with one target channel.

    ``index`` is strictly increasing.  Datasets produced by :func:`align` are
    gap-free; row filters (weekend selection) may leave gaps, see
    :attr:`is_contiguous`.
    """

    index: np.ndarray
    channels: Mapping[str, np.ndarray]
    roles: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        index = np.asarray(self.index, dtype="datetime64[h]").copy()
        index.setflags(write=False)
        channels = {name: _frozen(col) for name, col in self.channels.items()}
        for name, col in channels.items():
            if len(col) != len(index):
                raise ValueError(f"channel {name} has {len(col)} rows, index has {len(index)}")
        roles = dict(self.roles)
        if set(roles) != set(channels):
            raise ConfigError(f"roles {sorted(roles)} do not match channels {sorted(channels)}")
        targets = [n for n, r in roles.items() if r == TARGET]
        if len(targets) != 1:
            raise ConfigError(f"exactly one target channel required, got {targets}")
        if len(index) > 1 and not (np.diff(index) > np.timedelta64(0, "h")).all():
            raise ValueError("index must be strictly increasing")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "roles", roles)

    def __len__(self) -> int:
        return len(self.index)

    @property
    def channel_names(self) -> list[str]:
        return list(self.channels)

    @property
    def target_name(self) -> str:
        return next(n for n, r in self.roles.items() if r == TARGET)

    @property
    def target(self) -> np.ndarray:
        return self.channels[self.target_name]

    @property
    def start(self) -> np.datetime64:
        return self.index[0]

    @property
    def end(self) -> np.datetime64:
        return self.index[-1] + HOUR

    @property
    def is_contiguous(self) -> bool:
        return len(self.index) < 2 or bool((np.diff(self.index) == HOUR).all())

    def matrix(self) -> np.ndarray:
        """(rows, channels) array in channel order."""
        if not self.channels:
            return np.empty((len(self.index), 0))
        return np.column_stack([self.channels[n] for n in self.channels])

    def take(self, mask_or_idx) -> "AlignedDataset":
        return AlignedDataset(
            self.index[mask_or_idx],
            {n: c[mask_or_idx] for n, c in self.channels.items()},
            self.roles,
        )

    def between(self, start, stop) -> "AlignedDataset":
        """Rows with ``start <= t < stop`` (no range check)."""
        start, stop = hour(start), hour(stop)
        return self.take((self.index >= start) & (self.index < stop))

    def with_channel(self, name: str, values) -> "AlignedDataset":
        channels = dict(self.channels)
        channels[name] = values
        return AlignedDataset(self.index, channels, self.roles)

    def select_channels(self, names: Sequence[str]) -> "AlignedDataset":
        missing = [n for n in names if n not in self.channels]
        if missing:
            raise ConfigError(f"unknown channels {missing}")
        if self.target_name not in names:
            raise ConfigError(f"target channel {self.target_name!r} must be kept")
        return AlignedDataset(self.index, {n: self.channels[n] for n in names}, {n: self.roles[n] for n in names})


def align(channels: Iterable[HourlySeries], target_name: str) -> AlignedDataset:
    channels = list(channels)
    names = [c.name for c in channels]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ConfigError(f"duplicate channel names: {dupes}")
    if target_name not in names:
        raise ConfigError(f"target {target_name!r} not among channels {names}")
    start = max(c.start for c in channels)
    stop = min(c.end for c in channels)
    if start >= stop:
        ranges = ", ".join(f"{c.name}=[{c.start}, {c.end})" for c in channels)
        raise AlignmentError(f"channel ranges do not overlap: {ranges}")
    cols = {c.name: slice_series(c, start, stop).values for c in channels}
    index = start + np.arange(hours_between(start, stop)) * HOUR
    roles = {n: (TARGET if n == target_name else EXOGENOUS) for n in names}
    return AlignedDataset(index, cols, roles)
