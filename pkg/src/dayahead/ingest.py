"""CSV sources and the seeded synthetic market.

File schemas (UTF-8, header row, comma separated)::

    load.csv      timestamp,load_mw
    weather.csv   timestamp,air_temp_c,dew_point_c,wind_speed_ms,rel_humidity_pct
    covid.csv     date,new_cases,new_deaths
    mobility.csv  date,workplaces_pct_change,residential_pct_change

Hourly timestamps are ``YYYY-MM-DDTHH:00``; dates are ``YYYY-MM-DD``.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import prng
from .errors import ConfigError, DataQualityError, OrderingError, ParseError
from .series import HOUR, DailySeries, HourlySeries, day, hour, hours_between, weekday_numbers

SCHEMAS = {
    "load": ("timestamp", ("load_mw",)),
    "weather": ("timestamp", ("air_temp_c", "dew_point_c", "wind_speed_ms", "rel_humidity_pct")),
    "covid": ("date", ("new_cases", "new_deaths")),
    "mobility": ("date", ("workplaces_pct_change", "residential_pct_change")),
}
HOURLY_KINDS = ("load", "weather")
DAILY_KINDS = ("covid", "mobility")
FILENAMES = {kind: f"{kind}.csv" for kind in SCHEMAS}

MAX_GAP_HOURS = 3

_TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:00(:00)?$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    path: Path

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise ConfigError(f"unknown source kind {self.kind!r}; valid: {sorted(SCHEMAS)}")
        object.__setattr__(self, "path", Path(self.path))

    @property
    def key_column(self) -> str:
        return SCHEMAS[self.kind][0]

    @property
    def value_columns(self) -> tuple[str, ...]:
        return SCHEMAS[self.kind][1]

    @property
    def header(self) -> list[str]:
        return [self.key_column, *self.value_columns]


def _read_rows(spec: SourceSpec):
    """Yield (line_no, key, values) with NaN for empty cells."""
    with open(spec.path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{spec.path}: empty file, expected header {spec.header}") from None
        header = [h.strip() for h in header]
        if header != spec.header:
            raise ParseError(f"{spec.path}:1: header {header} != expected {spec.header}")
        key_re = _TS_RE if spec.kind in HOURLY_KINDS else _DATE_RE
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(spec.header):
                raise ParseError(f"{spec.path}:{line_no}: expected {len(spec.header)} fields, got {len(row)}")
            key = row[0].strip()
            if not key_re.match(key):
                raise ParseError(f"{spec.path}:{line_no}: bad {spec.key_column} {key!r}")
            try:
                stamp = hour(key) if spec.kind in HOURLY_KINDS else day(key)
            except ValueError:
                raise ParseError(f"{spec.path}:{line_no}: bad {spec.key_column} {key!r}") from None
            values = []
            for col, cell in zip(spec.value_columns, row[1:]):
                cell = cell.strip()
                if not cell:
                    values.append(math.nan)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{spec.path}:{line_no}: {col}={cell!r} is not a number") from None
                if not math.isfinite(v):
                    raise ParseError(f"{spec.path}:{line_no}: {col}={cell!r} is not finite")
                values.append(v)
            yield line_no, stamp, values


def _fill_gaps(name: str, index: np.ndarray, col: np.ndarray) -> np.ndarray:
    missing = np.isnan(col)
    if not missing.any():
        return col
    if missing[0] or missing[-1]:
        raise DataQualityError(f"{name}: first and last rows must be present (no extrapolation)")
    # run-length scan of missing stretches
    edges = np.flatnonzero(np.diff(missing.astype(np.int8)))
    starts, stops = edges[0::2] + 1, edges[1::2] + 1
    for a, b in zip(starts, stops):
        if b - a > MAX_GAP_HOURS:
            raise DataQualityError(
                f"{name}: gap of {b - a} hours from {index[a]} to {index[b - 1]} exceeds {MAX_GAP_HOURS}h"
            )
    x = np.arange(len(col))
    out = col.copy()
    out[missing] = np.interp(x[missing], x[~missing], col[~missing])
    return out


def parse_hourly_csv(spec: SourceSpec) -> list[HourlySeries]:
    if spec.kind not in HOURLY_KINDS:
        raise ConfigError(f"{spec.kind} is not an hourly source")
    stamps, rows = [], []
    for line_no, ts, values in _read_rows(spec):
        if stamps and ts <= stamps[-1]:
            if ts == stamps[-1]:
                continue  # repeated wall-clock hour (DST fall-back): keep the first
            raise OrderingError(f"{spec.path}:{line_no}: {ts} is before previous row {stamps[-1]}")
        stamps.append(ts)
        rows.append(values)
    if not stamps:
        raise ParseError(f"{spec.path}: no data rows")
    start = stamps[0]
    n = hours_between(start, stamps[-1]) + 1
    grid = np.full((n, len(spec.value_columns)), np.nan)
    pos = (np.array(stamps, dtype="datetime64[h]") - start) // HOUR
    grid[pos.astype(np.int64)] = np.array(rows, dtype=np.float64)
    index = start + np.arange(n) * HOUR
    return [
        HourlySeries(name, start, _fill_gaps(name, index, grid[:, j]))
        for j, name in enumerate(spec.value_columns)
    ]


def parse_daily_csv(spec: SourceSpec) -> list[DailySeries]:
    if spec.kind not in DAILY_KINDS:
        raise ConfigError(f"{spec.kind} is not a daily source")
    dates, rows = [], []
    for line_no, d, values in _read_rows(spec):
        if dates:
            expected = dates[-1] + np.timedelta64(1, "D")
            if d < expected:
                raise OrderingError(f"{spec.path}:{line_no}: {d} is not after previous row {dates[-1]}")
            if d > expected:
                raise DataQualityError(f"{spec.path}:{line_no}: missing day {expected}")
        if any(math.isnan(v) for v in values):
            raise DataQualityError(f"{spec.path}:{line_no}: empty value on {d}")
        if spec.kind == "covid" and any(v < 0 for v in values):
            raise DataQualityError(f"{spec.path}:{line_no}: negative case count on {d}")
        dates.append(d)
        rows.append(values)
    if not dates:
        raise ParseError(f"{spec.path}: no data rows")
    cols = np.array(rows, dtype=np.float64)
    return [DailySeries(name, dates[0], cols[:, j]) for j, name in enumerate(spec.value_columns)]


def parse_source(spec: SourceSpec):
    return parse_hourly_csv(spec) if spec.kind in HOURLY_KINDS else parse_daily_csv(spec)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_hourly_csv(path, kind: str, series: list[HourlySeries]) -> None:
    key, cols = SCHEMAS[kind]
    if [s.name for s in series] != list(cols):
        raise ConfigError(f"{kind} needs series {list(cols)}, got {[s.name for s in series]}")
    start, n = series[0].start, len(series[0])
    if any(s.start != start or len(s) != n for s in series):
        raise ConfigError(f"{kind}: series must share start and length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([key, *cols])
        for i, ts in enumerate(series[0].index):
            w.writerow([str(ts) + ":00", *(_fmt(s.values[i]) for s in series)])


def write_daily_csv(path, kind: str, series: list[DailySeries]) -> None:
    key, cols = SCHEMAS[kind]
    if [s.name for s in series] != list(cols):
        raise ConfigError(f"{kind} needs series {list(cols)}, got {[s.name for s in series]}")
    start, n = series[0].start_date, len(series[0])
    if any(s.start_date != start or len(s) != n for s in series):
        raise ConfigError(f"{kind}: series must share start and length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([key, *cols])
        for i in range(n):
            w.writerow([str(start + np.timedelta64(i, "D")), *(_fmt(s.values[i]) for s in series)])


@dataclass
class DataBundle:
    """The four raw sources of one market."""

    load: HourlySeries
    weather: list[HourlySeries]
    covid: list[DailySeries]
    mobility: list[DailySeries]


def read_bundle(data_dir) -> DataBundle:
    data_dir = Path(data_dir)
    parsed = {kind: parse_source(SourceSpec(kind, data_dir / FILENAMES[kind])) for kind in SCHEMAS}
    return DataBundle(parsed["load"][0], parsed["weather"], parsed["covid"], parsed["mobility"])


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --------------------------------------------------------------------------- synthetic


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 1
    n_days: int = 365
    base_mw: float = 14000.0
    weekday_amp: float = 6000.0
    weekend_amp: float = 3500.0
    shift_day: int = 280
    post_shift_weekday_amp: Optional[float] = None
    weather_coupling: float = 40.0
    noise_sd: float = 250.0
    start_date: str = "2019-06-16"
    case_log_sd: float = 1.0

    def __post_init__(self):
        errors = []
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            errors.append("seed must be an unsigned 64-bit integer")
        if self.n_days < 14:
            errors.append("n_days must be >= 14")
        if not 7 < self.shift_day < self.n_days:
            errors.append("shift_day must lie in (7, n_days)")
        amps = [self.weekday_amp, self.weekend_amp, self.post_weekday_amp]
        if any(a <= 0 for a in amps):
            errors.append("amplitudes must be > 0")
        if self.noise_sd < 0 or self.case_log_sd < 0:
            errors.append("noise_sd and case_log_sd must be >= 0")
        try:
            day(self.start_date)
        except ValueError:
            errors.append(f"start_date {self.start_date!r} is not a date")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def post_weekday_amp(self) -> float:
        return self.weekend_amp if self.post_shift_weekday_amp is None else self.post_shift_weekday_amp

    @property
    def shift_date(self) -> np.datetime64:
        return day(self.start_date) + np.timedelta64(self.shift_day, "D")


def diurnal(h) -> np.ndarray:
    """Daytime hump: sin(pi (h-5)/14) on [5, 19], zero elsewhere."""
    h = np.asarray(h, dtype=np.float64)
    return np.where((h >= 5) & (h <= 19), np.sin(np.pi * (h - 5) / 14), 0.0)


# PRNG stream ids, fixed for portability.
STREAMS = {
    "load": 0,
    "air_temp_c": 1,
    "dew_point_c": 2,
    "wind_speed_ms": 3,
    "rel_humidity_pct": 4,
    "new_cases": 5,
    "new_deaths": 6,
    "workplaces_pct_change": 7,
    "residential_pct_change": 8,
}


def generate_synthetic(cfg: SynthConfig) -> DataBundle:
    start = hour(day(cfg.start_date))
    n_hours = cfg.n_days * 24
    index = start + np.arange(n_hours) * HOUR
    hod = np.arange(n_hours) % 24
    day_idx = np.arange(n_hours) // 24
    weekend = weekday_numbers(index) >= 5
    post = day_idx >= cfg.shift_day

    doy = (index.astype("datetime64[D]") - index.astype("datetime64[Y]")).astype(np.int64)
    temp = (
        12.0
        - 12.0 * np.cos(2 * np.pi * (doy - 20) / 365.25)
        + 4.0 * np.sin(np.pi * (hod - 9) / 12)
        + 1.0 * prng.normal(cfg.seed, STREAMS["air_temp_c"], n_hours)
    )
    dew = temp - 4.0 - np.abs(2.0 * prng.normal(cfg.seed, STREAMS["dew_point_c"], n_hours))
    wind = 4.0 + np.abs(1.5 * prng.normal(cfg.seed, STREAMS["wind_speed_ms"], n_hours))
    humidity = np.clip(70.0 + 10.0 * prng.normal(cfg.seed, STREAMS["rel_humidity_pct"], n_hours), 5.0, 100.0)

    amp = np.where(weekend, cfg.weekend_amp, np.where(post, cfg.post_weekday_amp, cfg.weekday_amp))
    load = (
        cfg.base_mw
        + amp * diurnal(hod)
        + cfg.weather_coupling * temp
        + cfg.noise_sd * prng.normal(cfg.seed, STREAMS["load"], n_hours)
    )

    # Daily exogenous records: zero before the shift.
    n_days = cfg.n_days
    dates = day(cfg.start_date) + np.arange(n_days).astype("timedelta64[D]")
    d_weekend = weekday_numbers(dates) >= 5
    d_post = np.arange(n_days) >= cfg.shift_day
    # Mobility tracks the weekday demand cut, so it carries the load regime.
    drop_pct = 100.0 * (cfg.weekday_amp - cfg.post_weekday_amp) / cfg.weekday_amp
    work = -drop_pct * np.where(d_weekend, 0.4, 1.0) + 2.0 * prng.normal(cfg.seed, STREAMS["workplaces_pct_change"], n_days)
    resid = 0.3 * drop_pct * np.where(d_weekend, 0.5, 1.0) + 1.0 * prng.normal(
        cfg.seed, STREAMS["residential_pct_change"], n_days
    )
    # Case counts: heavy-tailed noise around a slow ramp, unrelated to the load shape.
    since = np.maximum(np.arange(n_days) - cfg.shift_day, 0)
    level = 3000.0 * (1.0 - np.exp(-since / 10.0)) + 500.0
    cases = np.round(level * np.exp(cfg.case_log_sd * prng.normal(cfg.seed, STREAMS["new_cases"], n_days)))
    deaths = np.round(0.05 * cases * np.exp(0.4 * prng.normal(cfg.seed, STREAMS["new_deaths"], n_days)))

    work, resid, cases, deaths = (np.where(d_post, x, 0.0) for x in (work, resid, cases, deaths))
    d0 = day(cfg.start_date)
    return DataBundle(
        load=HourlySeries("load_mw", start, load),
        weather=[
            HourlySeries("air_temp_c", start, temp),
            HourlySeries("dew_point_c", start, dew),
            HourlySeries("wind_speed_ms", start, wind),
            HourlySeries("rel_humidity_pct", start, humidity),
        ],
        covid=[DailySeries("new_cases", d0, cases), DailySeries("new_deaths", d0, deaths)],
        mobility=[
            DailySeries("workplaces_pct_change", d0, work),
            DailySeries("residential_pct_change", d0, resid),
        ],
    )


def write_bundle(bundle: DataBundle, out_dir, config: Optional[SynthConfig] = None) -> dict:
    """Write the four CSVs plus ``manifest.json``; returns the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_hourly_csv(out_dir / FILENAMES["load"], "load", [bundle.load])
    write_hourly_csv(out_dir / FILENAMES["weather"], "weather", bundle.weather)
    write_daily_csv(out_dir / FILENAMES["covid"], "covid", bundle.covid)
    write_daily_csv(out_dir / FILENAMES["mobility"], "mobility", bundle.mobility)
    manifest = {
        "schema_version": 1,
        "synth_config": asdict(config) if config is not None else None,
        "prng": "splitmix64 counter streams, Box-Muller cosine branch",
        "files": {FILENAMES[k]: file_digest(out_dir / FILENAMES[k]) for k in SCHEMAS},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
