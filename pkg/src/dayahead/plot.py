"""Daily MAPE line charts as standalone SVG text (no external assets)."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .errors import ReportError
from .report import ScenarioReport

WIDTH, HEIGHT = 720, 400
MARGIN = {"left": 60, "right": 130, "top": 30, "bottom": 45}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def nice_ceiling(x: float) -> float:
    """Smallest 1/2/2.5/5 x 10^k value that is >= x (1.0 for x <= 0)."""
    if x <= 0:
        return 1.0
    mag = 10.0 ** math.floor(math.log10(x))
    for step in (1.0, 2.0, 2.5, 5.0, 10.0):
        if step * mag >= x:
            return step * mag
    return 10.0 * mag  # pragma: no cover - loop always returns


def series_label(report: ScenarioReport) -> str:
    return report.architecture.upper() if report.architecture != "naive" else "naive"


def daily_mape_svg(reports: Sequence[ScenarioReport], title: str = "Daily MAPE") -> str:
    if not reports:
        raise ReportError("nothing to plot: no reports given")
    lengths = {len(r.daily_mape) for r in reports}
    if 0 in lengths:
        raise ReportError("a report has no daily MAPE values")
    n_max = max(lengths)
    y_max = nice_ceiling(max(max(r.daily_mape) for r in reports))
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def px(i):  # day index 1..n
        return x0 + (x1 - x0) * (i - 1) / max(n_max - 1, 1)

    def py(v):
        return y0 - (y0 - y1) * v / y_max

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" data-y-max="{y_max!r}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for k in range(6):
        v = y_max * k / 5
        out.append(f'<text x="{x0 - 6}" y="{py(v) + 4:.1f}" text-anchor="end" font-size="11">{v:g}</text>')
        out.append(f'<line x1="{x0}" y1="{py(v):.1f}" x2="{x1}" y2="{py(v):.1f}" stroke="#ddd"/>')
    for d in range(1, n_max + 1, 7):
        out.append(f'<text x="{px(d):.1f}" y="{y0 + 16}" text-anchor="middle" font-size="11">{d}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle" font-size="12">'
               "Day after order</text>")
    out.append(f'<text x="16" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {(y0 + y1) / 2:.1f})">MAPE (%)</text>')
    for k, rep in enumerate(reports):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(i + 1):.2f},{py(v):.2f}" for i, v in enumerate(rep.daily_mape))
        label = escape(series_label(rep))
        out.append(f'<polyline class="series" data-label="{label}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{pts}"/>')
        ly = y1 + 18 * k + 6
        out.append(f'<line x1="{x1 + 12}" y1="{ly}" x2="{x1 + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text class="legend" x="{x1 + 38}" y="{ly + 4}" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(reports: Sequence[ScenarioReport], path, title: str = "Daily MAPE") -> None:
    Path(path).write_text(daily_mape_svg(reports, title), encoding="utf-8")
