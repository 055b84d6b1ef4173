"""Minimal deterministic SVG plotting.

Hand-rolled on purpose: the figures are simple enough (polylines,
staircase histograms, log or linear x axes) that emitting SVG text
directly keeps outputs byte-stable and diffable, with no plotting
library in the dependency tree. Every data series renders as exactly
one ``<path>`` element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .errors import OsrError

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 48

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class Series:
    label: str
    xs: tuple[float, ...]
    ys: tuple[float, ...]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    """Maps data coordinates onto the pixel plot area."""

    def __init__(self, x_range, y_range, x_scale):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.x_scale = x_scale
        if x_scale == "log":
            if self.x0 <= 0:
                raise OsrError("log scale needs a positive x minimum")
            self.x0, self.x1 = math.log10(self.x0), math.log10(self.x1)

    def x_px(self, x: float) -> float:
        if self.x_scale == "log":
            x = math.log10(x)
        span = self.x1 - self.x0 or 1.0
        return MARGIN_L + (x - self.x0) / span * (WIDTH - MARGIN_L - MARGIN_R)

    def y_px(self, y: float) -> float:
        span = self.y1 - self.y0 or 1.0
        return HEIGHT - MARGIN_B - (y - self.y0) / span * (HEIGHT - MARGIN_T - MARGIN_B)


def _axis_elements(frame: _Frame, xlabel: str, ylabel: str, title: str) -> list[str]:
    parts = []
    left, right = MARGIN_L, WIDTH - MARGIN_R
    top, bottom = MARGIN_T, HEIGHT - MARGIN_B
    parts.append(
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
        'fill="none" stroke="#444" stroke-width="1"/>'
    )

    if frame.x_scale == "log":
        lo, hi = int(math.floor(frame.x0)), int(math.ceil(frame.x1))
        ticks = [(10.0 ** e, f"1e{e}" if e else "1") for e in range(lo, hi + 1)]
    else:
        span = frame.x1 - frame.x0 or 1.0
        ticks = [
            (frame.x0 + span * i / 5, f"{frame.x0 + span * i / 5:g}") for i in range(6)
        ]
    for x, label in ticks:
        px = frame.x_px(x) if frame.x_scale == "log" else (
            MARGIN_L + (x - frame.x0) / ((frame.x1 - frame.x0) or 1.0) * (right - left)
        )
        if px < left - 0.5 or px > right + 0.5:
            continue
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{bottom}" x2="{_fmt(px)}" y2="{bottom + 5}" '
            'stroke="#444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{bottom + 18}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{escape(label)}</text>'
        )

    y_span = frame.y1 - frame.y0 or 1.0
    for i in range(6):
        y = frame.y0 + y_span * i / 5
        py = frame.y_px(y)
        parts.append(
            f'<line x1="{left - 5}" y1="{_fmt(py)}" x2="{left}" y2="{_fmt(py)}" '
            'stroke="#444" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{_fmt(py + 4)}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{y:g}</text>'
        )

    parts.append(
        f'<text x="{(left + right) // 2}" y="{HEIGHT - 10}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="16" y="{(top + bottom) // 2}" font-size="13" text-anchor="middle" '
        f'font-family="sans-serif" transform="rotate(-90 16 {(top + bottom) // 2})">'
        f"{escape(ylabel)}</text>"
    )
    parts.append(
        f'<text x="{(left + right) // 2}" y="22" font-size="14" '
        f'text-anchor="middle" font-family="sans-serif">{escape(title)}</text>'
    )
    return parts


def _legend_elements(labels: list[str]) -> list[str]:
    parts = []
    x, y = MARGIN_L + 12, MARGIN_T + 16
    for i, label in enumerate(labels):
        color = PALETTE[i % len(PALETTE)]
        parts.append(
            f'<line x1="{x}" y1="{y + 18 * i - 4}" x2="{x + 22}" y2="{y + 18 * i - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{x + 28}" y="{y + 18 * i}" font-size="12" '
            f'font-family="sans-serif">{escape(label)}</text>'
        )
    return parts


def render_line_plot(
    series: list[Series],
    title: str,
    xlabel: str,
    ylabel: str,
    x_scale: str = "linear",
    y_range: tuple[float, float] | None = None,
    x_range: tuple[float, float] | None = None,
) -> str:
    """Polyline plot, one path per series.

    On a log x axis, points at or below the axis minimum are clipped to
    the minimum and flagged with a small open circle so curves that do
    not extend to low x values remain visible.
    """
    if not series:
        raise OsrError("nothing to plot")
    if x_scale not in ("linear", "log"):
        raise OsrError(f"bad x_scale {x_scale!r}")

    all_x = [x for s in series for x in s.xs]
    all_y = [y for s in series for y in s.ys]
    if not all_x:
        raise OsrError("series contain no points")

    if x_scale == "log":
        positive = [x for x in all_x if x > 0]
        if not positive:
            raise OsrError("log scale needs at least one positive x value")
        x_lo = 10.0 ** math.floor(math.log10(min(positive)))
        x_hi = max(all_x + [x_lo * 10])
    else:
        x_lo, x_hi = min(all_x), max(all_x)
        if x_lo == x_hi:
            x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if x_range is not None:
        x_lo, x_hi = x_range
    if y_range is None:
        y_lo, y_hi = min(all_y + [0.0]), max(all_y + [1.0])
    else:
        y_lo, y_hi = y_range

    frame = _Frame((x_lo, x_hi), (y_lo, y_hi), x_scale)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    ]
    parts.extend(_axis_elements(frame, xlabel, ylabel, title))

    clip_markers = []
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        coords = []
        for x, y in zip(s.xs, s.ys):
            clipped = x_scale == "log" and x < x_lo
            px = frame.x_px(x_lo if clipped else max(min(x, x_hi), x_lo))
            py = frame.y_px(max(min(y, y_hi), y_lo))
            coords.append((px, py))
            if clipped:
                clip_markers.append(
                    f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="none" '
                    f'stroke="{color}" stroke-width="1.2"/>'
                )
        d = "M " + " L ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in coords)
        parts.append(
            f'<path d="{d}" fill="none" stroke="{color}" stroke-width="1.6"/>'
        )
    parts.extend(clip_markers)
    parts.extend(_legend_elements([s.label for s in series]))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_histogram(
    series: list[tuple[str, list[float], list[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
) -> str:
    """Staircase histogram; each series is (label, bin_edges, counts)
    and renders as one path tracing the bar outline."""
    if not series:
        raise OsrError("nothing to plot")
    y_hi = max(max(counts) for _, _, counts in series) or 1.0
    x_lo = min(edges[0] for _, edges, _ in series)
    x_hi = max(edges[-1] for _, edges, _ in series)
    frame = _Frame((x_lo, x_hi), (0.0, y_hi), "linear")

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    ]
    parts.extend(_axis_elements(frame, xlabel, ylabel, title))
    for i, (label, edges, counts) in enumerate(series):
        if len(edges) != len(counts) + 1:
            raise OsrError("histogram needs len(edges) == len(counts) + 1")
        color = PALETTE[i % len(PALETTE)]
        pieces = [f"M {_fmt(frame.x_px(edges[0]))},{_fmt(frame.y_px(0.0))}"]
        for b, count in enumerate(counts):
            pieces.append(f"L {_fmt(frame.x_px(edges[b]))},{_fmt(frame.y_px(count))}")
            pieces.append(f"L {_fmt(frame.x_px(edges[b + 1]))},{_fmt(frame.y_px(count))}")
        pieces.append(f"L {_fmt(frame.x_px(edges[-1]))},{_fmt(frame.y_px(0.0))}")
        parts.append(
            f'<path d="{" ".join(pieces)}" fill="none" stroke="{color}" '
            'stroke-width="1.4"/>'
        )
    parts.extend(_legend_elements([label for label, _, _ in series]))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
