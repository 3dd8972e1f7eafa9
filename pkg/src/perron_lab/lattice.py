"""Integer points inside convex regions.

Membership is closed: boundary points count. Each polygon is scanned one
integer row at a time; the row's section ``[x_lo, x_hi]`` is snapped outward
by ``SNAP`` before rounding so that points on the boundary are not lost to
floating-point noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .geometry import ConvexPolygon, TiltedRect, area, transform

SNAP = 1e-9
PROCESS_PAD = 2 * math.sqrt(2)


class Box(NamedTuple):
    """Inclusive integer box ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: int
    xmax: int
    ymin: int
    ymax: int

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape ``(rows, cols)`` for data laid out as ``[y, x]``."""
        return (self.ymax - self.ymin + 1, self.xmax - self.xmin + 1)

    @property
    def size(self) -> int:
        h, w = self.shape
        return max(h, 0) * max(w, 0)

    def contains(self, x: int, y: int) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def union(self, other: "Box") -> "Box":
        return Box(min(self.xmin, other.xmin), max(self.xmax, other.xmax),
                   min(self.ymin, other.ymin), max(self.ymax, other.ymax))

    def pad(self, k: int) -> "Box":
        return Box(self.xmin - k, self.xmax + k, self.ymin - k, self.ymax + k)

    def shift(self, dx: int, dy: int) -> "Box":
        return Box(self.xmin + dx, self.xmax + dx, self.ymin + dy, self.ymax + dy)


class RowSpans(NamedTuple):
    """Lattice points of a convex set as one ``[x_lo, x_hi]`` run per row ``y``."""

    y: np.ndarray
    x_lo: np.ndarray
    x_hi: np.ndarray

    @property
    def count(self) -> int:
        return int((self.x_hi - self.x_lo + 1).sum())


@dataclass(frozen=True)
class LatticeSet:
    """A finite set of lattice points, stored as an ``(N, 2)`` integer array.

    Points are ordered row-major: by ``y`` first, then by ``x``.
    """

    points: np.ndarray
    window: Box

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, pt) -> bool:
        x, y = pt
        return bool(np.any((self.points[:, 0] == x) & (self.points[:, 1] == y)))

    def as_set(self) -> set[tuple[int, int]]:
        return {(int(x), int(y)) for x, y in self.points}

    def mask(self, window: Box | None = None) -> np.ndarray:
        """Boolean indicator laid out ``[y - ymin, x - xmin]`` on ``window``."""
        w = window or self.window
        m = np.zeros(w.shape, dtype=bool)
        if len(self.points):
            xs, ys = self.points[:, 0], self.points[:, 1]
            ok = (xs >= w.xmin) & (xs <= w.xmax) & (ys >= w.ymin) & (ys <= w.ymax)
            m[ys[ok] - w.ymin, xs[ok] - w.xmin] = True
        return m

    @classmethod
    def from_mask(cls, mask: np.ndarray, window: Box) -> "LatticeSet":
        ys, xs = np.nonzero(mask)
        pts = np.stack([xs + window.xmin, ys + window.ymin], axis=1).astype(np.int64)
        return cls(pts, window)


def _as_polygon(p: ConvexPolygon | TiltedRect) -> ConvexPolygon:
    return p.to_polygon() if isinstance(p, TiltedRect) else p


def row_spans(p: ConvexPolygon | TiltedRect) -> RowSpans:
    """Per integer row, the run of lattice x-coordinates inside ``p`` (closed)."""
    p = _as_polygon(p)
    xs, ys = p.xs, p.ys
    y_lo = math.ceil(ys.min() - SNAP)
    y_hi = math.floor(ys.max() + SNAP)
    if y_hi < y_lo:
        e = np.empty(0, dtype=np.int64)
        return RowSpans(e, e, e)
    rows = np.arange(y_lo, y_hi + 1, dtype=np.int64)
    yr = rows.astype(float)
    xa, ya = xs, ys
    xb, yb = np.roll(xs, -1), np.roll(ys, -1)
    dy = yb - ya
    e_lo = np.minimum(ya, yb) - SNAP
    e_hi = np.maximum(ya, yb) + SNAP
    hit = (yr[:, None] >= e_lo[None, :]) & (yr[:, None] <= e_hi[None, :])
    flat = np.abs(dy) <= 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.clip((yr[:, None] - ya[None, :]) / dy[None, :], 0.0, 1.0)
    xcut = xa[None, :] + t * (xb - xa)[None, :]
    # a flat edge contributes both of its endpoints
    x_min_cut = np.where(flat[None, :], np.minimum(xa, xb)[None, :], xcut)
    x_max_cut = np.where(flat[None, :], np.maximum(xa, xb)[None, :], xcut)
    x_lo = np.where(hit, x_min_cut, np.inf).min(axis=1)
    x_hi = np.where(hit, x_max_cut, -np.inf).max(axis=1)
    ok = np.isfinite(x_lo) & np.isfinite(x_hi)
    lo = np.full(len(rows), 1, dtype=np.int64)
    hi = np.full(len(rows), 0, dtype=np.int64)
    lo[ok] = np.ceil(x_lo[ok] - SNAP).astype(np.int64)
    hi[ok] = np.floor(x_hi[ok] + SNAP).astype(np.int64)
    keep = hi >= lo
    return RowSpans(rows[keep], lo[keep], hi[keep])


def count_points(p: ConvexPolygon | TiltedRect) -> int:
    """Number of integer points in the closed region ``p``."""
    return row_spans(p).count


def enumerate_points(p: ConvexPolygon | TiltedRect) -> LatticeSet:
    spans = row_spans(p)
    if spans.count == 0:
        return LatticeSet(np.empty((0, 2), dtype=np.int64), Box(0, -1, 0, -1))
    lengths = spans.x_hi - spans.x_lo + 1
    ys = np.repeat(spans.y, lengths)
    starts = np.repeat(spans.x_lo - np.cumsum(lengths) + lengths, lengths)
    xs = starts + np.arange(lengths.sum())
    pts = np.stack([xs, ys], axis=1).astype(np.int64)
    window = Box(int(spans.x_lo.min()), int(spans.x_hi.max()), int(spans.y.min()), int(spans.y.max()))
    return LatticeSet(pts, window)


def polygons_window(polys: Iterable[ConvexPolygon | TiltedRect]) -> Box:
    """Smallest integer box containing every lattice point of the given regions."""
    b = None
    for p in polys:
        xmin, xmax, ymin, ymax = _as_polygon(p).bounds()
        box = Box(math.ceil(xmin - SNAP), math.floor(xmax + SNAP),
                  math.ceil(ymin - SNAP), math.floor(ymax + SNAP))
        b = box if b is None else b.union(box)
    if b is None:
        raise ValueError("no regions given")
    return b


def rasterize(polys: Iterable[ConvexPolygon | TiltedRect], window: Box | None = None) -> tuple[np.ndarray, Box]:
    """Indicator of the lattice points of a union of convex regions."""
    polys = list(polys)
    window = window or polygons_window(polys)
    mask = np.zeros(window.shape, dtype=bool)
    for p in polys:
        spans = row_spans(p)
        for y, lo, hi in zip(spans.y, spans.x_lo, spans.x_hi):
            if window.ymin <= y <= window.ymax:
                a = max(lo, window.xmin) - window.xmin
                b = min(hi, window.xmax) - window.xmin
                if b >= a:
                    mask[y - window.ymin, a:b + 1] = True
    return mask, window


def count_union(polys: Iterable[ConvexPolygon | TiltedRect]) -> int:
    """Lattice points in a union of convex regions (each point counted once)."""
    mask, _ = rasterize(polys)
    return int(mask.sum())


# --- volume vs cardinality --------------------------------------------------

@dataclass(frozen=True)
class DensityReport:
    ratios: list[tuple[float, float]]
    delta0: float | None
    envelope: tuple[float, float] = (0.5, 1.5)


def check_density_ratio(p: ConvexPolygon, deltas: Sequence[float]) -> DensityReport:
    """Count-to-area ratio of ``delta * p`` along a grid of scales.

    ``delta0`` is the least sampled scale from which every later sampled
    ratio stays in [1/2, 3/2]; ``None`` if the last one is already outside.
    """
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas) or any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be positive and increasing")
    ratios = []
    for d in deltas:
        q = transform(p, (0.0, 0.0), d)
        ratios.append((d, count_points(q) / area(q)))
    delta0 = None
    for d, r in reversed(ratios):
        if not 0.5 <= r <= 1.5:
            break
        delta0 = d
    return DensityReport(ratios, delta0)


def process_sandwich(r: TiltedRect) -> tuple[float, float] | None:
    """Bounds on count/area for a rectangle with short side > 2*sqrt(2), else ``None``."""
    l, L = r.short_side, r.long_side
    if l <= PROCESS_PAD:
        return None
    return ((l - PROCESS_PAD) * (L - PROCESS_PAD) / (l * L),
            (l + PROCESS_PAD) * (L + PROCESS_PAD) / (l * L))


def check_process_ratio(r: TiltedRect) -> float:
    return count_points(r) / r.area
