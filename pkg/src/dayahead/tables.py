"""Summary tables across runs, in the two layouts of the original study.

* scenario table: rows are scenarios (Benchmark, Weekend), columns are
  architectures.
* feature table: rows are architectures, columns are rolling feature sets,
  plus a Benchmark row with the benchmark value under the weather column.

Cells aggregate seeds as mean with (min..max) when more than one seed ran.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .neural.models import ARCHITECTURES
from .report import ScenarioReport

FEATURE_TITLES = {"weather": "Weather", "covid": "COVID", "mobility": "Mobility"}
KIND_TITLES = {"benchmark": "Benchmark", "weekend": "Weekend", "seasonal-naive": "Seasonal naive"}


@dataclass(frozen=True)
class Cell:
    values: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def text(self) -> str:
        if len(self.values) == 1:
            return f"{self.values[0]:.2f}"
        return f"{self.mean:.2f} ({min(self.values):.2f}..{max(self.values):.2f})"


@dataclass(frozen=True)
class Table:
    name: str
    corner: str
    columns: tuple[str, ...]
    rows: tuple[tuple[str, tuple[Optional[Cell], ...]], ...]

    def to_text(self) -> str:
        grid = [[self.corner, *self.columns]]
        grid += [[label, *("-" if c is None else c.text() for c in cells)] for label, cells in self.rows]
        widths = [max(len(r[k]) for r in grid) for k in range(len(grid[0]))]
        lines = ["  ".join(v.ljust(w) if k == 0 else v.rjust(w) for k, (v, w) in enumerate(zip(r, widths)))
                 for r in grid]
        rule = "-" * len(lines[0])
        return "\n".join([f"{self.name} (MAPE %)", rule, lines[0], rule, *lines[1:], rule]) + "\n"

    def csv_rows(self) -> list[list]:
        out = []
        for label, cells in self.rows:
            for col, c in zip(self.columns, cells):
                if c is not None:
                    out.append([self.name, label, col, repr(c.mean), repr(min(c.values)), repr(max(c.values)),
                                len(c.values)])
        return out


def feature_title(features: Sequence[str]) -> str:
    return "+".join(FEATURE_TITLES.get(f, f) for f in features) if features else "Load"


def _ordered_archs(reports) -> list[str]:
    present = {r.architecture for r in reports}
    return [a for a in ARCHITECTURES if a in present] + sorted(present - set(ARCHITECTURES))


def _cell(reports) -> Optional[Cell]:
    vals = tuple(r.overall_mape for r in sorted(reports, key=lambda r: r.seed))
    return Cell(vals) if vals else None


def scenario_table(reports: Sequence[ScenarioReport]) -> Optional[Table]:
    chosen = [r for r in reports if r.kind in ("benchmark", "weekend")]
    if not chosen:
        return None
    archs = _ordered_archs(chosen)
    kinds = [k for k in ("benchmark", "weekend") if any(r.kind == k for r in chosen)]
    rows = []
    for k in kinds:
        cells = tuple(_cell([r for r in chosen if r.kind == k and r.architecture == a]) for a in archs)
        rows.append((KIND_TITLES[k], cells))
    naive = [r for r in reports if r.kind == "seasonal-naive"]
    if naive:
        c = _cell(naive)
        rows.append((KIND_TITLES["seasonal-naive"], tuple(c for _ in archs)))
    return Table("Scenarios", "Scenario", tuple(a.upper() for a in archs), tuple(rows))


def feature_table(reports: Sequence[ScenarioReport]) -> Optional[Table]:
    rolling = [r for r in reports if r.kind == "rolling"]
    if not rolling:
        return None
    archs = _ordered_archs(rolling)
    sets = sorted({tuple(r.features) for r in rolling}, key=lambda fs: (len(fs), [list(FEATURE_TITLES).index(f) for f in fs]))
    rows = []
    for a in archs:
        cells = tuple(_cell([r for r in rolling if r.architecture == a and tuple(r.features) == fs]) for fs in sets)
        rows.append((a.upper(), cells))
    bench = [r for r in reports if r.kind == "benchmark"]
    if bench:
        # single reference row: LSTM benchmark when available, else the first architecture run
        pick = "lstm" if any(r.architecture == "lstm" for r in bench) else _ordered_archs(bench)[0]
        c = _cell([r for r in bench if r.architecture == pick])
        rows.append((f"Benchmark ({pick.upper()})", tuple(c if fs == ("weather",) else None for fs in sets)))
    return Table("Features", "Features", tuple(feature_title(fs) for fs in sets), tuple(rows))


def summary_tables(reports: Sequence[ScenarioReport]) -> list[Table]:
    return [t for t in (scenario_table(reports), feature_table(reports)) if t is not None]


def tables_text(tables: Sequence[Table]) -> str:
    return "\n".join(t.to_text() for t in tables)


def tables_csv(tables: Sequence[Table]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "row", "column", "mean_mape_pct", "min_mape_pct", "max_mape_pct", "n_seeds"])
    for t in tables:
        w.writerows(t.csv_rows())
    return buf.getvalue()
