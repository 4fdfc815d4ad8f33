"""Scenario reports: MAPE bookkeeping and the JSON / CSV file formats."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import MetricError, ReportError

SCHEMA_VERSION = 1


def mape(actual, forecast, timestamps: Optional[Sequence] = None) -> float:
    """Mean absolute percentage error in percent: 100/n * sum |(L - F) / L|."""
    actual = np.asarray(actual, dtype=np.float64).ravel()
    forecast = np.asarray(forecast, dtype=np.float64).ravel()
    if actual.shape != forecast.shape:
        raise ValueError(f"actual has {actual.size} points, forecast {forecast.size}")
    if actual.size == 0:
        raise ValueError("mape of empty vectors")
    zero = np.flatnonzero(actual == 0)
    if zero.size:
        where = timestamps[zero[0]] if timestamps is not None else f"position {zero[0]}"
        raise MetricError(f"actual value is zero at {where}")
    return float(100.0 / actual.size * np.sum(np.abs((actual - forecast) / actual)))


@dataclass
class ScenarioReport:
    kind: str
    architecture: str
    features: list[str]
    seed: int
    fingerprint: str
    days: list[str]
    forecasts: np.ndarray  # (n_days, 24)
    actuals: np.ndarray  # (n_days, 24)
    daily_mape: list[float]
    weekly_mape: list[float]
    overall_mape: float
    feature_blind_weeks: list[int] = field(default_factory=list)
    traces: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "architecture": self.architecture,
            "features": list(self.features),
            "seed": self.seed,
            "fingerprint": self.fingerprint,
            "overall_mape": self.overall_mape,
            "weekly_mape": list(self.weekly_mape),
            "daily_mape": list(self.daily_mape),
            "feature_blind_weeks": list(self.feature_blind_weeks),
            "days": list(self.days),
            "forecasts": self.forecasts.tolist(),
            "actuals": self.actuals.tolist(),
            "traces": self.traces,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ReportError(f"unsupported report schema_version {d.get('schema_version')!r}")
        try:
            return cls(
                kind=d["kind"],
                architecture=d["architecture"],
                features=list(d["features"]),
                seed=int(d["seed"]),
                fingerprint=d["fingerprint"],
                days=list(d["days"]),
                forecasts=np.array(d["forecasts"], dtype=np.float64),
                actuals=np.array(d["actuals"], dtype=np.float64),
                daily_mape=[float(x) for x in d["daily_mape"]],
                weekly_mape=[float(x) for x in d["weekly_mape"]],
                overall_mape=float(d["overall_mape"]),
                feature_blind_weeks=list(d.get("feature_blind_weeks", [])),
                traces=list(d.get("traces", [])),
                config=dict(d.get("config", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ReportError(f"malformed report: {e!r}") from e

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    def write_daily_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "mape_pct"])
            for d, m in zip(self.days, self.daily_mape):
                w.writerow([d, repr(m)])

    @property
    def label(self) -> str:
        feats = "+".join(self.features) if self.features else "load"
        return f"{self.kind}/{feats}/{self.architecture}/seed{self.seed}"


def read_report(path) -> ScenarioReport:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ReportError(f"{path}: not a JSON report ({e})") from e
    if not isinstance(d, dict):
        raise ReportError(f"{path}: report must be a JSON object")
    return ScenarioReport.from_dict(d)


def assemble_report(forecasts, actuals, days: Sequence, *, kind: str = "", architecture: str = "",
                    features: Sequence[str] = (), seed: int = 0, fingerprint: str = "",
                    feature_blind_weeks: Sequence[int] = (), traces: Sequence[dict] = (),
                    config: Optional[dict] = None) -> ScenarioReport:
    """Daily, weekly (7-day blocks) and pooled overall MAPE from per-day 24-vectors."""
    forecasts = np.asarray(forecasts, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    days = [str(np.datetime64(d, "D")) for d in days]
    if forecasts.ndim != 2 or forecasts.shape != actuals.shape or forecasts.shape[1] != 24:
        raise ReportError(f"forecasts {forecasts.shape} and actuals {actuals.shape} must both be (n_days, 24)")
    if len(days) != len(forecasts):
        raise ReportError(f"{len(days)} day labels for {len(forecasts)} forecast days")
    if len(days) == 0 or len(days) % 7:
        raise ReportError(f"need a whole number of weeks, got {len(days)} days")
    if not (np.isfinite(forecasts).all() and np.isfinite(actuals).all()):
        raise ReportError("non-finite forecast or actual values")
    hours = [f"{d}T{h:02d}" for d in days for h in range(24)]
    daily = [mape(a, f, hours[24 * k : 24 * k + 24]) for k, (a, f) in enumerate(zip(actuals, forecasts))]
    weekly = [
        mape(actuals[k : k + 7], forecasts[k : k + 7], hours[24 * k : 24 * (k + 7)])
        for k in range(0, len(days), 7)
    ]
    overall = mape(actuals, forecasts, hours)
    return ScenarioReport(
        kind=kind,
        architecture=architecture,
        features=list(features),
        seed=seed,
        fingerprint=fingerprint,
        days=days,
        forecasts=forecasts,
        actuals=actuals,
        daily_mape=daily,
        weekly_mape=weekly,
        overall_mape=overall,
        feature_blind_weeks=list(feature_blind_weeks),
        traces=list(traces),
        config=dict(config or {}),
    )
