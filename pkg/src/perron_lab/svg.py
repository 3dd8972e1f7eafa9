"""Minimal deterministic SVG figures on a fixed 1000 x 1000 view box.

World coordinates map to the view by ``(x, y) -> (ax * x + bx, ay * y + by)``
with ``ay < 0`` so that y points up. The map is stored in the file as JSON
metadata, so plotted coordinates can be read back exactly.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

VIEW = 1000.0
MARGIN = 50.0


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") if v == v else "0"


class Figure:
    """Collects shapes in world coordinates and renders one SVG document."""

    def __init__(self, bounds: tuple[float, float, float, float], title: str = "", equal_aspect: bool = True):
        xmin, xmax, ymin, ymax = bounds
        w = max(xmax - xmin, 1e-12)
        h = max(ymax - ymin, 1e-12)
        span = VIEW - 2 * MARGIN
        sx, sy = span / w, span / h
        if equal_aspect:
            sx = sy = min(sx, sy)
        self.ax, self.ay = sx, -sy
        self.bx = MARGIN - sx * xmin + 0.5 * (span - sx * w)
        self.by = VIEW - MARGIN + sy * ymin - 0.5 * (span - sy * h)
        self.bounds = bounds
        self.title = title
        self.items: list[str] = []

    def to_view(self, x: float, y: float) -> tuple[float, float]:
        return self.ax * x + self.bx, self.ay * y + self.by

    def _pts(self, pts: Iterable[Sequence[float]]) -> str:
        return " ".join(f"{_fmt(vx)},{_fmt(vy)}" for vx, vy in (self.to_view(x, y) for x, y in pts))

    def polygon(self, pts, fill: str = "none", stroke: str = "black", opacity: float = 1.0, width: float = 1.0):
        self.items.append(f'<polygon points="{self._pts(pts)}" fill="{fill}" fill-opacity="{_fmt(opacity)}" '
                          f'stroke="{stroke}" stroke-width="{_fmt(width)}"/>')

    def polyline(self, pts, stroke: str = "black", width: float = 2.0):
        self.items.append(f'<polyline points="{self._pts(pts)}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{_fmt(width)}"/>')

    def circle(self, x: float, y: float, r: float = 4.0, fill: str = "black"):
        vx, vy = self.to_view(x, y)
        self.items.append(f'<circle cx="{_fmt(vx)}" cy="{_fmt(vy)}" r="{_fmt(r)}" fill="{fill}"/>')

    def text(self, x: float, y: float, s: str, size: float = 16.0, world: bool = True):
        vx, vy = self.to_view(x, y) if world else (x, y)
        self.items.append(f'<text x="{_fmt(vx)}" y="{_fmt(vy)}" font-size="{_fmt(size)}" '
                          f'font-family="sans-serif">{escape(s)}</text>')

    def render(self) -> str:
        meta = {"world_bounds": list(self.bounds),
                "world_to_view": {"ax": self.ax, "bx": self.bx, "ay": self.ay, "by": self.by}}
        head = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {int(VIEW)} {int(VIEW)}" '
                f'width="{int(VIEW)}" height="{int(VIEW)}">',
                f"<metadata>{escape(json.dumps(meta, sort_keys=True))}</metadata>",
                f'<rect x="0" y="0" width="{int(VIEW)}" height="{int(VIEW)}" fill="white"/>']
        if self.title:
            head.append(f'<text x="{_fmt(MARGIN)}" y="30" font-size="20" font-family="sans-serif">'
                        f"{escape(self.title)}</text>")
        return "\n".join(head + self.items + ["</svg>", ""])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.render())


def line_chart(series: dict[str, Sequence[tuple[float, float]]], title: str = "") -> Figure:
    """One polyline with markers per named series, axes scaled independently."""
    pts = [p for s in series.values() for p in s]
    if not pts:
        return Figure((0.0, 1.0, 0.0, 1.0), title, equal_aspect=False)
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    fig = Figure((x0, x1, y0, y1), title, equal_aspect=False)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    fig.polyline([(x0, y0), (x1, y0)], stroke="gray", width=1)
    fig.polyline([(x0, y0), (x0, y1)], stroke="gray", width=1)
    fig.text(x0, y1, f"{y1:.4g}", size=14)
    fig.text(x0, y0, f"{y0:.4g}", size=14)
    fig.text(x1, y0, f"{x1:.4g}", size=14)
    for k, (name, s) in enumerate(sorted(series.items())):
        c = colors[k % len(colors)]
        if len(s) > 1:
            fig.polyline(s, stroke=c)
        for x, y in s:
            fig.circle(x, y, 5, fill=c)
        fig.text(MARGIN + 20, 60 + 22 * k, name, size=16, world=False)
        fig.items.append(f'<rect x="{_fmt(MARGIN)}" y="{_fmt(48 + 22 * k)}" width="14" height="14" fill="{c}"/>')
    return fig
