"""Dependency-free SVG line chart for labeling-rate sweeps."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 150, 60, 70

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"]


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


def line_chart(
    series: Mapping[str, Sequence[tuple[float, float]]],
    *,
    title: str = "",
    x_label: str = "labeling rate",
    y_label: str = "test accuracy",
) -> str:
    """Render ``{name: [(x, y), ...]}`` as an SVG document string.

    Series are drawn and colored in lexicographic name order; points with a
    NaN ``y`` are skipped.
    """
    names = sorted(series)
    pts = [(x, y) for n in names for x, y in series[n] if not math.isnan(y)]
    xs = [p[0] for p in pts] or [0.0, 1.0]
    ys = [p[1] for p in pts] or [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.05, x_hi + 0.05
    y_lo, y_hi = min(ys), max(ys)
    pad = max(0.02, 0.1 * (y_hi - y_lo))
    y_lo = max(0.0, y_lo - pad)
    y_hi = min(1.0, y_hi + pad) if y_hi <= 1.0 else y_hi + pad

    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * (right - left)

    def py(y: float) -> float:
        return bottom - (y - y_lo) / (y_hi - y_lo) * (bottom - top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="32" text-anchor="middle" font-size="20">{escape(title)}</text>')

    out.append('<g class="axes" stroke="#000000" stroke-width="1">')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/>')
    out.append("</g>")

    out.append('<g class="ticks" font-size="12">')
    for t in _nice_ticks(x_lo, x_hi):
        if x_lo - 1e-12 <= t <= x_hi + 1e-12:
            x = px(t)
            out.append(f'<line x1="{x:.1f}" y1="{bottom}" x2="{x:.1f}" y2="{bottom + 5}" stroke="#000000"/>')
            out.append(f'<text x="{x:.1f}" y="{bottom + 20}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        if y_lo - 1e-12 <= t <= y_hi + 1e-12:
            y = py(t)
            out.append(f'<line x1="{left - 5}" y1="{y:.1f}" x2="{right}" y2="{y:.1f}" stroke="#dddddd"/>')
            out.append(f'<text x="{left - 8}" y="{y + 4:.1f}" text-anchor="end">{t:g}</text>')
    out.append("</g>")

    out.append(
        f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 25}" text-anchor="middle" font-size="14">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="20" y="{(top + bottom) / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 20 {(top + bottom) / 2:.1f})">{escape(y_label)}</text>'
    )

    legend_y = top + 10
    for k, name in enumerate(names):
        color = PALETTE[k % len(PALETTE)]
        points = sorted((x, y) for x, y in series[name] if not math.isnan(y))
        if points:
            attr_name = escape(name, {'"': "&quot;"})
            coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in points)
            out.append(
                f'<polyline class="series" data-name="{attr_name}" fill="none" stroke="{color}" '
                f'stroke-width="2" points="{coords}"/>'
            )
            for x, y in points:
                out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{color}"/>')
        ly = legend_y + 22 * k
        out.append('<g class="legend-entry">')
        out.append(f'<line x1="{right + 20}" y1="{ly}" x2="{right + 45}" y2="{ly}" stroke="{color}" stroke-width="3"/>')
        out.append(f'<text x="{right + 52}" y="{ly + 4}" font-size="13">{escape(name)}</text>')
        out.append("</g>")

    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_line_chart(path, series, **kwargs) -> Path:
    path = Path(path)
    path.write_text(line_chart(series, **kwargs), encoding="utf-8")
    return path
