"""Triangle ABC with A=(1,0), B=(0,b), C=(0,c), its enlargement AB'C',
the covering rectangle P and the trapezium V = BCC'B'.

For every x in V the translate x + P overlaps the triangle in area at least
min(alpha, 1)/72 * |P|, where alpha = |AB| / |BC|. This module builds the
objects and measures that overlap, continuously and on the lattice.

The rectangle is the smallest one containing AB'C' with a side on the line
through A and the far enlarged vertex B'. With that choice the 1/72 bound
holds and is attained (at B' for thin triangles). Resting the rectangle on
the short side AC' instead (``side="near"``) breaks the bound by up to a
factor of five when b >> c; that variant is kept for comparison only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import ConvexPolygon, Point, TiltedRect, area, clip, point, transform
from .lattice import count_points

OVERLAP_CONSTANT = 1.0 / 72.0
ENLARGE = 1.5
# the bound is attained exactly at a vertex of V; allow for rounding there
OVERLAP_RTOL = 1e-9
# count/area stays in [1/2, 3/2] at large scales, so the discrete overlap
# ratio is compared against the continuous bound times (1/2) / (3/2).
DISCRETE_DEGRADATION = 0.5 * (2.0 / 3.0)


@dataclass(frozen=True)
class Construction1:
    b: float
    c: float
    A: Point
    B: Point
    C: Point
    Bp: Point
    Cp: Point
    Ptilde: TiltedRect
    P: TiltedRect
    V: ConvexPolygon
    alpha: float
    side: str = "far"

    @property
    def triangle(self) -> ConvexPolygon:
        return ConvexPolygon([self.A, self.B, self.C])

    @property
    def enlarged_triangle(self) -> ConvexPolygon:
        return ConvexPolygon([self.A, self.Bp, self.Cp])

    @property
    def bound(self) -> float:
        """min(alpha, 1)/72 * |P|"""
        return min(self.alpha, 1.0) * OVERLAP_CONSTANT * self.P.area


def _smallest_rect_on_line(a: Point, d: Point, others: Sequence[Point]) -> TiltedRect:
    """Smallest rectangle with one side on the line through ``a`` and ``d``
    containing ``a``, ``d`` and ``others``."""
    ex, ey = d.x - a.x, d.y - a.y
    norm = math.hypot(ex, ey)
    ex, ey = ex / norm, ey / norm
    nx, ny = -ey, ex
    pts = [a, d, *others]
    ts = [(p.x - a.x) * ex + (p.y - a.y) * ey for p in pts]
    hs = [(p.x - a.x) * nx + (p.y - a.y) * ny for p in pts]
    if max(hs) < -min(hs):
        nx, ny = -nx, -ny
        hs = [-h for h in hs]
    t0, t1 = min(ts), max(ts)
    height = max(hs)
    tm = 0.5 * (t0 + t1)
    center = point(a.x + tm * ex + 0.5 * height * nx, a.y + tm * ey + 0.5 * height * ny)
    return TiltedRect.from_sides(center, t1 - t0, height, math.atan2(ey, ex))


def build_construction1(b: float, c: float, side: str = "far") -> Construction1:
    """``side`` picks the line carrying one side of the rectangle: ``"far"``
    is (AB'), ``"near"`` is (AC')."""
    if side not in ("far", "near"):
        raise ValueError(f"side must be 'far' or 'near', got {side!r}")
    if not b > 0:
        raise ValueError(f"b must be positive, got {b}")
    if not 0 <= c < b:
        raise ValueError(f"need 0 <= c < b, got b={b}, c={c}")
    A, B, C = point(1, 0), point(0, b), point(0, c)
    Bp = point(A.x + ENLARGE * (B.x - A.x), A.y + ENLARGE * (B.y - A.y))
    Cp = point(A.x + ENLARGE * (C.x - A.x), A.y + ENLARGE * (C.y - A.y))
    if side == "far":
        Ptilde = _smallest_rect_on_line(A, Bp, [Cp])
    else:
        Ptilde = _smallest_rect_on_line(A, Cp, [Bp])
    P = TiltedRect(point(0, 0), Ptilde.long_half, Ptilde.short_half, Ptilde.angle)
    V = ConvexPolygon([B, C, Cp, Bp])
    alpha = math.hypot(B.x - A.x, B.y - A.y) / (b - c)
    return Construction1(b, c, A, B, C, Bp, Cp, Ptilde, P, V, alpha, side)


class OverlapCheck(NamedTuple):
    measured: float
    bound: float
    passed: bool


def overlap_area(cons: Construction1, x: Sequence[float]) -> float:
    moved = transform(cons.P.to_polygon(), x, 1.0)
    piece = clip(moved, cons.triangle)
    return 0.0 if piece is None else area(piece)


def verify_overlap(cons: Construction1, x: Sequence[float]) -> OverlapCheck:
    """Compare |(x + P) ∩ ABC| with min(alpha, 1)/72 * |P| for x in V."""
    x = point(*x)
    if not cons.V.contains(x, tol=1e-9):
        raise ValueError(f"point {tuple(x)} is outside the trapezium")
    measured = overlap_area(cons, x)
    bound = cons.bound
    return OverlapCheck(measured, bound, measured >= bound * (1 - OVERLAP_RTOL))


def sample_trapezium(cons: Construction1, n_uniform: int, rng: np.random.Generator) -> list[Point]:
    """Vertices, edge midpoints, then ``n_uniform`` rejection samples of V."""
    verts = list(cons.V.vertices)
    pts = verts + [point(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)) for a, b in cons.V.edges()]
    xmin, xmax, ymin, ymax = cons.V.bounds()
    while len(pts) < len(verts) * 2 + n_uniform:
        x, y = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
        if cons.V.contains((x, y), tol=0.0):
            pts.append(point(x, y))
    return pts


def discrete_overlap_ratio(cons: Construction1, x: Sequence[float], delta: float) -> float:
    """#(delta((x+P) ∩ ABC) ∩ Z^2) / #(delta P ∩ Z^2)."""
    moved = transform(cons.P.to_polygon(), x, 1.0)
    piece = clip(moved, cons.triangle)
    if piece is None:
        return 0.0
    num = count_points(transform(piece, (0.0, 0.0), delta))
    den = count_points(transform(cons.P, (0.0, 0.0), delta))
    return num / den


@dataclass(frozen=True)
class DiscreteScale:
    delta: float | None
    worst_ratio: float
    threshold: float
    trace: list[tuple[float, float]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.delta is not None


def discrete_threshold(cons: Construction1) -> float:
    return DISCRETE_DEGRADATION * min(cons.alpha, 1.0) * OVERLAP_CONSTANT


def discrete_samples(cons: Construction1, seed: int = 0, n_interior: int = 50) -> list[Point]:
    """Vertices of V plus ``n_interior`` uniform interior points (seeded)."""
    rng = np.random.default_rng(seed)
    pts = list(cons.V.vertices)
    xmin, xmax, ymin, ymax = cons.V.bounds()
    while len(pts) < 4 + n_interior:
        x, y = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
        if cons.V.contains((x, y), tol=0.0):
            pts.append(point(x, y))
    return pts


def worst_discrete_ratio(cons: Construction1, delta: float, samples: Sequence[Point]) -> float:
    return min(discrete_overlap_ratio(cons, x, delta) for x in samples)


def discrete_overlap_scale(cons: Construction1, delta_grid: Sequence[float], seed: int = 0,
                           samples: Sequence[Point] | None = None) -> DiscreteScale:
    """Smallest sampled scale at which every sampled x in V passes the lattice bound.

    The bound is ``min(alpha, 1)/72`` degraded by the count/area envelope
    factors 1/2 (numerator) and 3/2 (denominator). ``worst_ratio`` is the
    minimum over samples at the returned scale, or at the last scale tried.
    """
    grid = [float(d) for d in delta_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("delta grid must be increasing")
    samples = list(samples) if samples is not None else discrete_samples(cons, seed)
    thr = discrete_threshold(cons)
    trace = []
    worst = math.nan
    for d in grid:
        worst = worst_discrete_ratio(cons, d, samples)
        trace.append((d, worst))
        if worst >= thr:
            return DiscreteScale(d, worst, thr, trace)
    return DiscreteScale(None, worst, thr, trace)
