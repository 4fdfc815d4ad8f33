"""YAML run configuration.

A run file looks like::

    data_dir: data/synthetic        # four CSVs in the ingest schemas
    output_dir: runs/table1         # optional; see DAYAHEAD_OUTPUT_DIR
    scenarios: [benchmark, weekend]
    architectures: [fcdnn, lstm, gru]
    feature_sets: [weather, covid, mobility]   # rolling columns; "a+b" combines
    seeds: [1, 2, 3]
    workers: 1
    warm_start: false
    split: {stay_at_home: "2020-03-22T00", horizon_weeks: 10}
    train: {epochs: 50, rnn_hidden: 64}

Relative paths resolve against the config file's directory.  Validation
collects every problem before raising, so one edit cycle fixes them all.
"""
from __future__ import annotations

import datetime as dt
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .errors import ConfigError
from .features import FEATURE_SETS, SplitConfig
from .ingest import SynthConfig
from .neural.models import ARCHITECTURES
from .neural.training import TrainConfig
from .scenarios import KINDS, ScenarioConfig

OUTPUT_ENV = "DAYAHEAD_OUTPUT_DIR"
DEFAULT_OUTPUT = "runs"

RUN_KEYS = {"data_dir", "output_dir", "scenarios", "architectures", "feature_sets", "seeds", "workers",
            "warm_start", "split", "train", "naive_baseline"}
SPLIT_KEYS = {"stay_at_home", "train_start", "horizon_weeks"}
TRAIN_KEYS = {f.name for f in fields(TrainConfig)} - {"seed"}
SYNTH_KEYS = {f.name for f in fields(SynthConfig)}


@dataclass(frozen=True)
class RunConfig:
    data_dir: Path
    output_dir: Optional[Path] = None
    scenarios: tuple[str, ...] = ("benchmark",)
    architectures: tuple[str, ...] = ("lstm",)
    feature_sets: tuple[tuple[str, ...], ...] = (("weather",),)
    seeds: tuple[int, ...] = (0,)
    workers: int = 1
    warm_start: bool = False
    naive_baseline: bool = False
    split: SplitConfig = field(default_factory=SplitConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    source: dict = field(default_factory=dict)  # resolved mapping, for manifests

    def scenario_configs(self) -> list[ScenarioConfig]:
        """Every (scenario, feature set, architecture, seed) job in a stable order."""
        jobs = []
        for kind in self.scenarios:
            sets = self.feature_sets if kind == "rolling" else (("weather",),)
            for feats in sets:
                for arch in self.architectures:
                    for seed in self.seeds:
                        train = TrainConfig(**{**self.train.to_dict(), "seed": seed})
                        jobs.append(ScenarioConfig(kind, arch, feats, self.split, train, self.warm_start))
        return jobs

    def resolve_output(self, override=None) -> Path:
        if override is not None:
            return Path(override)
        if self.output_dir is not None:
            return self.output_dir
        return Path(os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT))


def read_yaml(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror})") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML ({e})") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def jsonable(value):
    """Config mapping with YAML dates turned into ISO strings."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (dt.date, dt.datetime)):
        return value.isoformat()
    return value


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _parse_split(raw: Any, errors: list[str]) -> SplitConfig:
    if raw is None:
        return SplitConfig()
    if not isinstance(raw, dict):
        errors.append("split: must be a mapping")
        return SplitConfig()
    for k in sorted(set(raw) - SPLIT_KEYS):
        errors.append(f"split.{k}: unknown key (valid: {', '.join(sorted(SPLIT_KEYS))})")
    kw = {k: raw[k] for k in SPLIT_KEYS & set(raw)}
    for k in ("stay_at_home", "train_start"):
        if kw.get(k) is not None:
            try:
                kw[k] = np.datetime64(str(kw[k]), "h")
            except ValueError:
                errors.append(f"split.{k}: {kw[k]!r} is not a timestamp")
                kw.pop(k)
    if "horizon_weeks" in kw and (not isinstance(kw["horizon_weeks"], int) or kw["horizon_weeks"] <= 0):
        errors.append(f"split.horizon_weeks: must be a positive integer, got {kw['horizon_weeks']!r}")
        kw.pop("horizon_weeks")
    try:
        return SplitConfig(**kw)
    except (ValueError, TypeError) as e:
        errors.append(f"split: {e}")
        return SplitConfig()


def _parse_train(raw: Any, errors: list[str]) -> TrainConfig:
    if raw is None:
        return TrainConfig()
    if not isinstance(raw, dict):
        errors.append("train: must be a mapping")
        return TrainConfig()
    for k in sorted(set(raw) - TRAIN_KEYS):
        hint = " (seeds are set by the top-level 'seeds' list)" if k == "seed" else ""
        errors.append(f"train.{k}: unknown key{hint}")
    kw = {k: raw[k] for k in TRAIN_KEYS & set(raw)}
    try:
        return TrainConfig(**kw)
    except (ConfigError, TypeError, ValueError) as e:
        errors.extend(f"train: {msg}" for msg in str(e).split("; "))
        return TrainConfig()


def parse_run_config(raw: dict, base_dir=".") -> RunConfig:
    base_dir = Path(base_dir)
    errors: list[str] = []
    for k in sorted(set(raw) - RUN_KEYS):
        errors.append(f"{k}: unknown key (valid: {', '.join(sorted(RUN_KEYS))})")

    data_dir = raw.get("data_dir")
    if data_dir is None:
        errors.append("data_dir: required")
    out = raw.get("output_dir")

    scenarios = [str(s) for s in _as_list(raw.get("scenarios", ["benchmark"]))]
    for s in scenarios:
        if s not in KINDS:
            errors.append(f"scenarios: unknown scenario kind {s!r}; valid kinds: {', '.join(KINDS)}")
    archs = [str(a) for a in _as_list(raw.get("architectures", ["lstm"]))]
    for a in archs:
        if a not in ARCHITECTURES:
            errors.append(f"architectures: unknown architecture {a!r}; valid: {', '.join(ARCHITECTURES)}")

    feature_sets = []
    for entry in _as_list(raw.get("feature_sets", ["weather"])):
        parts = tuple(p.strip() for p in str(entry).split("+"))
        bad = [p for p in parts if p not in FEATURE_SETS]
        if bad:
            errors.append(f"feature_sets: unknown feature {bad[0]!r} in {entry!r}; valid: {', '.join(FEATURE_SETS)}")
        else:
            feature_sets.append(tuple(f for f in FEATURE_SETS if f in parts))
    if any(fs != ("weather",) for fs in feature_sets) and "rolling" not in scenarios:
        errors.append("feature_sets: covid/mobility feature sets only apply to the rolling scenario")

    seeds = _as_list(raw.get("seeds", [0]))
    if not seeds or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds):
        errors.append(f"seeds: must be a non-empty list of non-negative integers, got {seeds!r}")
    elif len(set(seeds)) != len(seeds):
        errors.append("seeds: duplicates")

    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        errors.append(f"workers: must be a positive integer, got {workers!r}")
    for flag in ("warm_start", "naive_baseline"):
        if not isinstance(raw.get(flag, False), bool):
            errors.append(f"{flag}: must be true or false")

    split = _parse_split(raw.get("split"), errors)
    train = _parse_train(raw.get("train"), errors)
    if errors:
        raise ConfigError("invalid run config:\n  " + "\n  ".join(errors))
    return RunConfig(
        data_dir=base_dir / str(data_dir),
        output_dir=None if out is None else base_dir / str(out),
        scenarios=tuple(scenarios),
        architectures=tuple(archs),
        feature_sets=tuple(feature_sets),
        seeds=tuple(int(s) for s in seeds),
        workers=workers,
        warm_start=raw.get("warm_start", False),
        naive_baseline=raw.get("naive_baseline", False),
        split=split,
        train=train,
        source=jsonable(raw),
    )


def load_run_config(path) -> RunConfig:
    path = Path(path)
    return parse_run_config(read_yaml(path), path.parent)


def parse_synth_config(raw: dict) -> SynthConfig:
    """``raw`` may hold the fields directly or under a ``synth`` key."""
    if "synth" in raw:
        raw = raw["synth"] or {}
        if not isinstance(raw, dict):
            raise ConfigError("synth: must be a mapping")
    unknown = sorted(set(raw) - SYNTH_KEYS)
    if unknown:
        raise ConfigError(f"unknown synth keys {unknown}; valid: {', '.join(sorted(SYNTH_KEYS))}")
    raw = jsonable(raw)
    try:
        return SynthConfig(**raw)
    except TypeError as e:
        raise ConfigError(f"synth: {e}") from e


def load_synth_config(path) -> SynthConfig:
    return parse_synth_config(read_yaml(path))
