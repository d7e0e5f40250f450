"""Dependency-free SVG charts for the report emitters.

Fixed, documented geometry: line charts are 960x480 per panel with a 70px
left / 40px other margin; diverging bar charts size themselves to the entry
count at 16px per row around a centered axis (right = upward, left =
downward). The generation timestamp comment is the only non-deterministic
byte in an emitted file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Sequence
from xml.sax.saxutils import escape

__all__ = ["Series", "line_chart", "multi_panel_line_chart", "diverging_bar_chart"]

# grayscale ramp, darkest first
_COLORS = ("#333333", "#8c8c8c", "#c4c4c4", "#5a5a5a", "#a8a8a8")

_MARGIN_LEFT = 70
_MARGIN = 40
_PANEL_W = 960
_PANEL_H = 480


@dataclass(frozen=True)
class Series:
    name: str
    values: Sequence[float | None]


def _stamp() -> str:
    return f"<!-- generated: {datetime.now(timezone.utc).isoformat()} -->"


def _ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / max(target, 2)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:g}"


def _panel(
    x_labels: Sequence[str],
    series: Sequence[Series],
    *,
    title: str,
    y_label: str,
    y_offset: int,
    show_x_labels: bool,
) -> tuple[list[str], float, float]:
    values = [
        v for s in series for v in s.values if v is not None and math.isfinite(v)
    ]
    lo = min(values) if values else 0.0
    hi = max(values) if values else 1.0
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo -= pad
    hi += pad

    plot_w = _PANEL_W - _MARGIN_LEFT - _MARGIN
    plot_h = _PANEL_H - 2 * _MARGIN
    n = max(len(x_labels), 1)

    def x_pos(i: int) -> float:
        return _MARGIN_LEFT + (plot_w * i / max(n - 1, 1))

    def y_pos(v: float) -> float:
        return y_offset + _MARGIN + plot_h * (1.0 - (v - lo) / (hi - lo))

    out = []
    out.append(
        f'<text x="{_PANEL_W / 2}" y="{y_offset + 22}" text-anchor="middle" '
        f'font-size="15" font-weight="bold">{escape(title)}</text>'
    )
    out.append(
        f'<rect x="{_MARGIN_LEFT}" y="{y_offset + _MARGIN}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="#999"/>'
    )
    for tick in _ticks(lo, hi):
        y = y_pos(tick)
        out.append(
            f'<line x1="{_MARGIN_LEFT}" y1="{y:.2f}" x2="{_MARGIN_LEFT + plot_w}" '
            f'y2="{y:.2f}" stroke="#e0e0e0"/>'
        )
        out.append(
            f'<text x="{_MARGIN_LEFT - 6}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-size="11">{_fmt(tick)}</text>'
        )
    label_every = max(1, n // 12)
    for i, label in enumerate(x_labels):
        if show_x_labels and i % label_every == 0:
            out.append(
                f'<text x="{x_pos(i):.2f}" y="{y_offset + _MARGIN + plot_h + 16}" '
                f'text-anchor="middle" font-size="11">{escape(label)}</text>'
            )
    out.append(
        f'<text x="16" y="{y_offset + _MARGIN + plot_h / 2:.2f}" font-size="12" '
        f'transform="rotate(-90 16 {y_offset + _MARGIN + plot_h / 2:.2f})" '
        f'text-anchor="middle">{escape(y_label)}</text>'
    )
    for si, s in enumerate(series):
        color = _COLORS[si % len(_COLORS)]
        points = [
            f"{x_pos(i):.2f},{y_pos(v):.2f}"
            for i, v in enumerate(s.values)
            if v is not None and math.isfinite(v)
        ]
        if points:
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.8" '
                f'points="{" ".join(points)}"/>'
            )
        lx = _MARGIN_LEFT + plot_w - 150
        ly = y_offset + _MARGIN + 16 + 16 * si
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{lx + 30}" y="{ly}" font-size="11">{escape(s.name)}</text>'
        )
    return out, lo, hi


def line_chart(
    x_labels: Sequence[str],
    series: Sequence[Series],
    *,
    title: str,
    y_label: str,
) -> str:
    body, _, _ = _panel(
        x_labels, series, title=title, y_label=y_label, y_offset=0, show_x_labels=True
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_PANEL_W}" '
        f'height="{_PANEL_H}" font-family="sans-serif">\n{_stamp()}\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def multi_panel_line_chart(
    x_labels: Sequence[str],
    panels: Sequence[tuple[str, str, Sequence[Series]]],
    *,
    title: str,
) -> str:
    """Stacked panels sharing the x axis; each panel is (title, y_label, series)."""
    parts = []
    for i, (panel_title, y_label, series) in enumerate(panels):
        body, _, _ = _panel(
            x_labels,
            series,
            title=panel_title,
            y_label=y_label,
            y_offset=i * _PANEL_H,
            show_x_labels=i == len(panels) - 1,
        )
        parts.extend(body)
    height = _PANEL_H * len(panels)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_PANEL_W}" '
        f'height="{height}" font-family="sans-serif">\n{_stamp()}\n'
        f'<title>{escape(title)}</title>\n' + "\n".join(parts) + "\n</svg>\n"
    )


def diverging_bar_chart(
    entries: Sequence[tuple[str, float, bool]],
    *,
    title: str,
    subtitle: str = "",
    width: int = 900,
) -> str:
    """Horizontal bars around a center axis: (label, magnitude, rightward).

    Rightward bars point right, the rest left; entries render top to bottom in
    the given order.
    """
    row_h = 16
    top = 56 if subtitle else 40
    height = top + row_h * max(len(entries), 1) + 20
    center = width / 2
    max_mag = max((abs(m) for _, m, _ in entries), default=1.0) or 1.0
    half_span = (width / 2) - 120

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" font-family="sans-serif">',
        _stamp(),
        f'<text x="{center}" y="20" text-anchor="middle" font-size="15" '
        f'font-weight="bold">{escape(title)}</text>',
    ]
    if subtitle:
        out.append(
            f'<text x="{center}" y="38" text-anchor="middle" font-size="12" '
            f'fill="#555">{escape(subtitle)}</text>'
        )
    out.append(
        f'<line x1="{center}" y1="{top - 8}" x2="{center}" '
        f'y2="{height - 14}" stroke="#999"/>'
    )
    for i, (label, magnitude, rightward) in enumerate(entries):
        y = top + i * row_h
        length = half_span * abs(magnitude) / max_mag
        if rightward:
            x0, color, tx, anchor = center, "#333333", center + length + 6, "start"
        else:
            x0, color, tx, anchor = center - length, "#a0a0a0", center - length - 6, "end"
        out.append(
            f'<rect x="{x0:.2f}" y="{y}" width="{length:.2f}" height="{row_h - 4}" '
            f'fill="{color}"/>'
        )
        out.append(
            f'<text x="{tx:.2f}" y="{y + row_h - 7}" text-anchor="{anchor}" '
            f'font-size="11">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
