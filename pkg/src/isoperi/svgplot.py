"""Minimal SVG line charts drawn straight from CSV columns."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import IsoperiError

WIDTH, HEIGHT = 640, 400
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


class PlotError(IsoperiError, ValueError):
    """Requested columns are missing or hold no numeric data."""


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_chart(x, series: dict, x_label: str, y_label: str) -> str:
    """SVG text for one or more y-series against x (non-finite points are skipped)."""
    pts = [(xi, yi) for ys in series.values() for xi, yi in zip(x, ys) if math.isfinite(xi) and math.isfinite(yi)]
    if not pts:
        raise PlotError("no finite data to plot")
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    sx = lambda v: MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2 * MARGIN)
    sy = lambda v: HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2 * MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 15 {HEIGHT / 2})">{escape(y_label)}</text>'
    )
    for i, (name, ys) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        path = " ".join(
            f"{sx(xi):.2f},{sy(yi):.2f}" for xi, yi in zip(x, ys) if math.isfinite(xi) and math.isfinite(yi)
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        out.append(f'<text x="{WIDTH - MARGIN}" y="{MARGIN - 8 - 14 * i}" text-anchor="end" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return math.nan


def plot(csv_path, columns, svg_path=None) -> Path:
    """Plot ``columns[1:]`` against ``columns[0]`` from a CSV with a header row."""
    csv_path = Path(csv_path)
    if len(columns) < 2:
        raise PlotError("need an x column and at least one y column")
    with csv_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise PlotError(f"missing columns: {', '.join(missing)}")
        rows = list(reader)
    x = [_number(r[columns[0]]) for r in rows]
    series = {c: [_number(r[c]) for r in rows] for c in columns[1:]}
    svg = line_chart(x, series, columns[0], ", ".join(columns[1:]))
    svg_path = Path(svg_path) if svg_path else csv_path.with_suffix(".svg")
    svg_path.write_text(svg)
    return svg_path
