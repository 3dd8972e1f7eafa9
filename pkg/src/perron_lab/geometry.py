"""Planar primitives: points, tilted rectangles, convex polygons.

All coordinates are double precision. Orientation tests use an absolute
tolerance of ``ORIENT_TOL`` on cross products. Rectangles and polygons are
closed sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

ORIENT_TOL = 1e-12


class GeometryError(ValueError):
    """Raised for degenerate or invalid geometric input."""


class Point(NamedTuple):
    x: float
    y: float


def point(x: float, y: float) -> Point:
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite coordinates ({x}, {y})")
    return Point(x, y)


def _cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _signed_area(vertices: Sequence[Sequence[float]]) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _clean(vertices: list[Point]) -> list[Point]:
    """Drop repeated and collinear vertices (cyclically)."""
    pts = []
    for p in vertices:
        if not pts or abs(p.x - pts[-1].x) > ORIENT_TOL or abs(p.y - pts[-1].y) > ORIENT_TOL:
            pts.append(p)
    if len(pts) > 1 and abs(pts[0].x - pts[-1].x) <= ORIENT_TOL and abs(pts[0].y - pts[-1].y) <= ORIENT_TOL:
        pts.pop()
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        n = len(pts)
        for i in range(n):
            prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % n]
            ex, ey = nxt.x - prev.x, nxt.y - prev.y
            scale = max(math.hypot(ex, ey), 1.0)
            if abs(_cross(prev, cur, nxt)) <= ORIENT_TOL * scale:
                del pts[i]
                changed = True
                break
    return pts


@dataclass(frozen=True)
class ConvexPolygon:
    """Closed convex polygon with counter-clockwise vertices.

    Clockwise input is reversed; repeated and collinear vertices are dropped.
    Non-convex or (near) zero-area input raises ``GeometryError``.
    """

    vertices: tuple[Point, ...]

    def __init__(self, vertices: Iterable[Sequence[float]]):
        pts = _clean([point(*v) for v in vertices])
        if len(pts) < 3:
            raise GeometryError("polygon needs at least three non-collinear vertices")
        a = _signed_area(pts)
        if abs(a) <= ORIENT_TOL:
            raise GeometryError(f"degenerate polygon (area {a:g})")
        if a < 0:
            pts.reverse()
        n = len(pts)
        for i in range(n):
            c = _cross(pts[i - 1], pts[i], pts[(i + 1) % n])
            if c < -ORIENT_TOL * max(1.0, abs(a)):
                raise GeometryError("polygon is not convex")
        object.__setattr__(self, "vertices", tuple(pts))

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    @property
    def xs(self) -> np.ndarray:
        return np.array([v.x for v in self.vertices])

    @property
    def ys(self) -> np.ndarray:
        return np.array([v.y for v in self.vertices])

    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax)"""
        xs, ys = self.xs, self.ys
        return float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max())

    def edges(self) -> list[tuple[Point, Point]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def contains(self, p: Sequence[float], tol: float = 1e-9) -> bool:
        """Closed membership test; ``tol`` is a distance slack."""
        for a, b in self.edges():
            length = math.hypot(b.x - a.x, b.y - a.y)
            if _cross(a, b, p) < -tol * length:
                return False
        return True

    def centroid(self) -> Point:
        v = self.vertices
        a = _signed_area(v)
        cx = cy = 0.0
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            w = x0 * y1 - x1 * y0
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        return Point(cx / (6 * a), cy / (6 * a))


@dataclass(frozen=True)
class TiltedRect:
    """Closed rectangle with arbitrary orientation.

    ``angle`` is the direction of the longest side, reduced to [0, pi).
    """

    center: Point
    long_half: float
    short_half: float
    angle: float

    def __post_init__(self):
        c = point(*self.center)
        if not (self.long_half > 0 and self.short_half > 0):
            raise GeometryError("rectangle half-sides must be positive")
        if self.long_half < self.short_half:
            raise GeometryError("long_half must be >= short_half")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "angle", float(self.angle) % math.pi)

    @classmethod
    def from_sides(cls, center, side_a: float, side_b: float, angle_a: float) -> "TiltedRect":
        """Build from two side lengths; ``angle_a`` is the direction of ``side_a``."""
        if side_a >= side_b:
            return cls(point(*center), side_a / 2, side_b / 2, angle_a)
        return cls(point(*center), side_b / 2, side_a / 2, angle_a + math.pi / 2)

    @property
    def long_side(self) -> float:
        return 2 * self.long_half

    @property
    def short_side(self) -> float:
        return 2 * self.short_half

    @property
    def area(self) -> float:
        return 4 * self.long_half * self.short_half

    def is_square(self) -> bool:
        return math.isclose(self.long_half, self.short_half, rel_tol=1e-12)

    def slope(self) -> float:
        """Tangent of the angle between the longest side and the horizontal.

        For squares both side directions qualify and the one making the
        smaller angle with the horizontal is used.
        """
        a = self.angle
        if self.is_square():
            a = a % (math.pi / 2)
            if a > math.pi / 4:
                a -= math.pi / 2
        if math.isclose(a, math.pi / 2, abs_tol=1e-15):
            return math.inf
        return math.tan(a)

    def corners(self) -> list[Point]:
        ux, uy = math.cos(self.angle), math.sin(self.angle)
        vx, vy = -uy, ux
        cx, cy = self.center
        L, s = self.long_half, self.short_half
        return [
            Point(cx - L * ux - s * vx, cy - L * uy - s * vy),
            Point(cx + L * ux - s * vx, cy + L * uy - s * vy),
            Point(cx + L * ux + s * vx, cy + L * uy + s * vy),
            Point(cx - L * ux + s * vx, cy - L * uy + s * vy),
        ]

    def to_polygon(self) -> ConvexPolygon:
        return ConvexPolygon(self.corners())


@dataclass(frozen=True)
class PolygonFamily:
    """An explicit (unmerged) union of convex polygons."""

    members: tuple[ConvexPolygon, ...]

    def __init__(self, members: Iterable[ConvexPolygon]):
        members = tuple(members)
        if not members:
            raise GeometryError("polygon family must be non-empty")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def bounds(self) -> tuple[float, float, float, float]:
        bs = np.array([m.bounds() for m in self.members])
        return float(bs[:, 0].min()), float(bs[:, 1].max()), float(bs[:, 2].min()), float(bs[:, 3].max())


def rect_to_polygon(r: TiltedRect) -> ConvexPolygon:
    return r.to_polygon()


def area(p: ConvexPolygon | TiltedRect) -> float:
    """Shoelace area."""
    if isinstance(p, TiltedRect):
        return p.area
    return _signed_area(p.vertices)


def clip(p: ConvexPolygon, q: ConvexPolygon) -> ConvexPolygon | None:
    """Intersection of two convex polygons; ``None`` when it has no area."""
    out: list[Sequence[float]] = list(p.vertices)
    for a, b in q.edges():
        if not out:
            break
        inp, out = out, []
        ex, ey = b.x - a.x, b.y - a.y
        length = math.hypot(ex, ey)
        s = inp[-1]
        ds = (ex * (s[1] - a.y) - ey * (s[0] - a.x)) / length
        for e in inp:
            de = (ex * (e[1] - a.y) - ey * (e[0] - a.x)) / length
            if de >= 0:
                if ds < 0:
                    t = ds / (ds - de)
                    out.append((s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])))
                out.append(e)
            elif ds >= 0:
                t = ds / (ds - de)
                out.append((s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])))
            s, ds = e, de
    if len(out) < 3:
        return None
    try:
        return ConvexPolygon(out)
    except GeometryError:
        return None


def clip_area(p: ConvexPolygon, q: ConvexPolygon) -> float:
    r = clip(p, q)
    return 0.0 if r is None else area(r)


def transform(obj, translation: Sequence[float] = (0.0, 0.0), scale: float = 1.0):
    """Map ``z -> scale * z + translation`` on a point, polygon, rect or family."""
    if not scale > 0:
        raise GeometryError(f"scale must be positive, got {scale}")
    tx, ty = float(translation[0]), float(translation[1])
    if isinstance(obj, ConvexPolygon):
        return ConvexPolygon([(scale * v.x + tx, scale * v.y + ty) for v in obj.vertices])
    if isinstance(obj, TiltedRect):
        c = obj.center
        return TiltedRect(Point(scale * c.x + tx, scale * c.y + ty),
                          scale * obj.long_half, scale * obj.short_half, obj.angle)
    if isinstance(obj, PolygonFamily):
        return PolygonFamily(transform(m, translation, scale) for m in obj.members)
    if isinstance(obj, tuple) and len(obj) == 2:
        return point(scale * obj[0] + tx, scale * obj[1] + ty)
    raise TypeError(f"cannot transform {type(obj).__name__}")


def translate(obj, dx: float, dy: float = 0.0):
    return transform(obj, (dx, dy), 1.0)


def enlarge_rect(r: TiltedRect, pad: float) -> TiltedRect:
    """Push every side of ``r`` outward by ``pad``, keeping center and angle."""
    if pad < 0:
        raise GeometryError("pad must be >= 0")
    return TiltedRect(r.center, r.long_half + pad, r.short_half + pad, r.angle)


# --- union area by vertical slab sweep -------------------------------------

def _edge_arrays(polys: Sequence[ConvexPolygon]):
    x0, y0, x1, y1, owner = [], [], [], [], []
    for idx, p in enumerate(polys):
        for a, b in p.edges():
            x0.append(a.x)
            y0.append(a.y)
            x1.append(b.x)
            y1.append(b.y)
            owner.append(idx)
    return (np.array(x0), np.array(y0), np.array(x1), np.array(y1), np.array(owner))


def _crossing_xs(x0, y0, x1, y1, owner) -> np.ndarray:
    """x-coordinates of proper crossings between edges of different polygons."""
    dx, dy = x1 - x0, y1 - y0
    den = dx[:, None] * dy[None, :] - dy[:, None] * dx[None, :]
    rx = x0[None, :] - x0[:, None]
    ry = y0[None, :] - y0[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rx * dy[None, :] - ry * dx[None, :]) / den
        u = (rx * dy[:, None] - ry * dx[:, None]) / den
    ok = (owner[:, None] < owner[None, :]) & (np.abs(den) > 1e-300)
    ok &= (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    ii, _ = np.nonzero(ok)
    return x0[ii] + t[ok] * dx[ii]


def _vertical_sections(polys: Sequence[ConvexPolygon], xm: np.ndarray):
    """Per polygon, the [lo, hi] section at each abscissa (empty -> lo=inf, hi=-inf)."""
    S, m = len(xm), len(polys)
    lo = np.full((S, m), np.inf)
    hi = np.full((S, m), -np.inf)
    for j, p in enumerate(polys):
        xs, ys = p.xs, p.ys
        xa, ya = xs, ys
        xb, yb = np.roll(xs, -1), np.roll(ys, -1)
        inside = (xm > xs.min()) & (xm < xs.max())
        if not inside.any():
            continue
        xq = xm[inside]
        dx = xb - xa
        nonvert = np.abs(dx) > 0
        xa_, ya_, xb_, yb_, dx_ = xa[nonvert], ya[nonvert], xb[nonvert], yb[nonvert], dx[nonvert]
        t = (xq[:, None] - xa_[None, :]) / dx_[None, :]
        hit = (t >= 0) & (t <= 1)
        yv = ya_[None, :] + t * (yb_ - ya_)[None, :]
        lo[inside, j] = np.where(hit, yv, np.inf).min(axis=1)
        hi[inside, j] = np.where(hit, yv, -np.inf).max(axis=1)
    return lo, hi


def _union_lengths(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    order = np.argsort(lo, axis=1)
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    reach = np.maximum.accumulate(hi, axis=1)
    prev = np.concatenate([np.full((lo.shape[0], 1), -np.inf), reach[:, :-1]], axis=1)
    with np.errstate(invalid="ignore"):
        covered = hi - np.maximum(lo, prev)
    covered = np.where(np.isfinite(covered) & (covered > 0), covered, 0.0)
    return covered.sum(axis=1)


def union_area(f: PolygonFamily | Sequence[ConvexPolygon]) -> float:
    """Exact area of a union of convex polygons.

    Between consecutive breakpoints (vertex abscissae and edge crossings)
    each vertical section of each member is one interval with linear
    endpoints and a fixed ordering, so the union length is linear in x and
    the midpoint rule is exact per slab.
    """
    polys = list(f.members if isinstance(f, PolygonFamily) else f)
    if not polys:
        return 0.0
    if len(polys) == 1:
        return area(polys[0])
    x0, y0, x1, y1, owner = _edge_arrays(polys)
    xs = np.concatenate([x0, _crossing_xs(x0, y0, x1, y1, owner)])
    xs = np.unique(xs)
    widths = np.diff(xs)
    keep = widths > 0
    if not keep.any():
        return 0.0
    xm = 0.5 * (xs[:-1] + xs[1:])[keep]
    lo, hi = _vertical_sections(polys, xm)
    return float(np.dot(widths[keep], _union_lengths(lo, hi)))
