"""Dyadic blocks of triangles with a common apex and their Perron-tree compression.

For a direction set ``u`` the k-th triangle has apex (0, 1) and base
[u_{k-1}, u_k] on the x-axis. Block n holds k = 2^n .. 2^{n+1}-1. Sliding
the triangles horizontally shrinks the area of their union; the achieved
ratio ``epsilon`` is measured, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .directions import DirectionSet, condition_i_constant
from .geometry import ConvexPolygon, TiltedRect, point, transform, translate, union_area
from .lattice import count_points, rasterize
from .triangle_cover import (
    Construction1,
    build_construction1,
    discrete_samples,
    discrete_threshold,
    worst_discrete_ratio,
)

METHODS = ("pairwise-bisection", "coordinate-search")
CS_RTOL = 1e-4
PAIR_GRID = 161
SIMILAR_COPY_FRACTION = 1.0 / 9.0


def block_indices(n: int) -> range:
    return range(2 ** n, 2 ** (n + 1))


def build_triangles(d: DirectionSet, n: int) -> list[ConvexPolygon]:
    """The 2^n triangles of block ``n``, left to right."""
    if n < 0:
        raise ValueError("block index must be >= 0")
    last = 2 ** (n + 1) - 1
    if last > len(d):
        raise ValueError(f"block {n} needs u_1..u_{last}, have {len(d)} directions")
    u = d.u
    return [ConvexPolygon([(0.0, 1.0), (u[k - 1], 0.0), (u[k], 0.0)]) for k in block_indices(n)]


def _shifted(triangles: Sequence[ConvexPolygon], taus: Sequence[float]) -> list[ConvexPolygon]:
    return [translate(t, tau) if tau else t for t, tau in zip(triangles, taus)]


def compression(triangles: Sequence[ConvexPolygon], taus: Sequence[float]) -> float:
    return union_area(_shifted(triangles, taus)) / union_area(triangles)


def _base_span(triangles: Sequence[ConvexPolygon], taus: Sequence[float]) -> tuple[float, float]:
    xs = [x + tau for t, tau in zip(triangles, taus) for x in t.xs]
    return min(xs), max(xs)


def _best_slide(objective, lo: float, hi: float, start: float) -> float:
    """Global-ish 1-D minimisation: grid scan, then bounded polish around the best cell."""
    grid = np.unique(np.append(np.linspace(lo, hi, PAIR_GRID), np.clip(start, lo, hi)))
    vals = np.array([objective(s) for s in grid])
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    best_s, best_v = float(grid[i]), float(vals[i])
    if b > a:
        res = minimize_scalar(objective, bounds=(a, b), method="bounded",
                              options={"xatol": 1e-9 * max(1.0, hi - lo)})
        if res.fun < best_v:
            best_s = float(res.x)
    return best_s


def pairwise_bisection(triangles: Sequence[ConvexPolygon], h: float = 0.5) -> list[float]:
    """Recursively merge adjacent units, sliding each right unit left.

    A unit is a run of consecutive triangles moved rigidly. For each pair the
    slide starts from the classical Perron choice, where the outer edges of
    the pair meet at height ``h``, and is then tuned to minimise the pair's
    union area over slides back to the left end of the pair.
    """
    if not 0 < h < 1:
        raise ValueError("overlap height fraction must lie in (0, 1)")
    m = len(triangles)
    taus = [0.0] * m
    units = [[i] for i in range(m)]
    while len(units) > 1:
        merged = []
        for j in range(0, len(units) - 1, 2):
            left, right = units[j], units[j + 1]
            members = [triangles[i] for i in left + right]
            base = [taus[i] for i in left + right]
            nl = len(left)
            lo_x, hi_x = _base_span(members, base)
            span = hi_x - lo_x

            def objective(s, members=members, base=base, nl=nl):
                trial = base[:nl] + [t + s for t in base[nl:]]
                return union_area(_shifted(members, trial))

            s = _best_slide(objective, -span, 0.0, -(1 - h) * span)
            for i in right:
                taus[i] += s
            merged.append(left + right)
        if len(units) % 2:
            merged.append(units[-1])
        units = merged
    return taus


def coordinate_search(triangles: Sequence[ConvexPolygon], taus: Sequence[float],
                      rtol: float = CS_RTOL, max_cycles: int = 50) -> list[float]:
    """Cyclic 1-D descent on each translation (the first stays at 0)."""
    taus = list(taus)
    m = len(triangles)
    if m < 2:
        return taus
    current = union_area(_shifted(triangles, taus))
    for _ in range(max_cycles):
        start = current
        lo_x, hi_x = _base_span(triangles, taus)
        width = hi_x - lo_x
        for k in range(1, m):
            def objective(s, k=k):
                trial = taus[:k] + [s] + taus[k + 1:]
                return union_area(_shifted(triangles, trial))

            s = _best_slide(objective, taus[k] - 0.5 * width, taus[k] + 0.5 * width, taus[k])
            v = objective(s)
            if v < current:
                taus[k], current = s, v
        if start - current <= rtol * start:
            break
    return taus


def optimize_translations(triangles: Sequence[ConvexPolygon], method: str = "coordinate-search",
                          h: float = 0.5) -> tuple[list[float], float]:
    """Horizontal translations compressing the union; returns ``(taus, epsilon)``.

    ``coordinate-search`` starts from the pairwise-bisection result and refines it.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if not triangles:
        raise ValueError("need at least one triangle")
    if len(triangles) == 1:
        return [0.0], 1.0
    taus = pairwise_bisection(triangles, h)
    if method == "coordinate-search":
        taus = coordinate_search(triangles, taus)
    eps = compression(triangles, taus)
    return taus, min(eps, 1.0)


# --- blocks ---------------------------------------------------------------

def _swap(p):
    """Reflection across the diagonal; maps the normal-form triangle onto a block triangle."""
    if isinstance(p, TiltedRect):
        return TiltedRect(point(p.center.y, p.center.x), p.long_half, p.short_half, math.pi / 2 - p.angle)
    if isinstance(p, ConvexPolygon):
        return ConvexPolygon([(v.y, v.x) for v in p.vertices])
    return point(p[1], p[0])


@dataclass(frozen=True)
class PerronBlock:
    n: int
    directions: DirectionSet
    triangles: list[ConvexPolygon]
    taus: list[float]
    epsilon: float
    constructions: list[Construction1]
    trapezia: list[ConvexPolygon]
    rects: list[TiltedRect]
    method: str
    h: float
    condition_i: float
    delta: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def indices(self) -> range:
        return block_indices(self.n)

    @property
    def hull(self) -> ConvexPolygon:
        """The single triangle equal to the union of the untranslated block."""
        u = self.directions.u
        return ConvexPolygon([(0.0, 1.0), (u[2 ** self.n - 1], 0.0), (u[2 ** (self.n + 1) - 1], 0.0)])

    @property
    def K(self) -> list[ConvexPolygon]:
        """Translated triangles."""
        return _shifted(self.triangles, self.taus)

    @property
    def V(self) -> list[ConvexPolygon]:
        """Translated trapezia."""
        return _shifted(self.trapezia, self.taus)

    def scaled(self, delta: float):
        """(K, V, hull, rects) dilated by ``delta``."""
        K = [transform(p, (0.0, 0.0), delta) for p in self.K]
        V = [transform(p, (0.0, 0.0), delta) for p in self.V]
        hull = transform(self.hull, (0.0, 0.0), delta)
        rects = [transform(r, (0.0, 0.0), delta) for r in self.rects]
        return K, V, hull, rects

    def with_delta(self, delta: float) -> "PerronBlock":
        return replace(self, delta=float(delta))


def assemble_block(d: DirectionSet, n: int, method: str = "coordinate-search", h: float = 0.5) -> PerronBlock:
    """Build block ``n``: triangles, translations, and per-triangle trapezia/rectangles.

    Each triangle (0,1), (u_{k-1},0), (u_k,0) is the mirror image across the
    diagonal of the normal form A=(1,0), B=(0,u_k), C=(0,u_{k-1}); the mirror
    is an isometry, so the overlap bound carries over unchanged.
    """
    triangles = build_triangles(d, n)
    last = 2 ** (n + 1) - 1
    c_i = condition_i_constant(d, last)
    if not c_i > 0 or not math.isfinite(c_i):
        raise ValueError(f"condition (i) fails on u_1..u_{last} (constant {c_i})")
    taus, eps = optimize_translations(triangles, method, h)
    u = d.u
    cons = [build_construction1(u[k], u[k - 1]) for k in block_indices(n)]
    trapezia = [_swap(c.V) for c in cons]
    rects = [_swap(c.P) for c in cons]
    meta = {
        "normal_form_map": "(x, y) -> (y, x); apex (1,0) <-> (0,1), B=(0,u_k) <-> (u_k,0), C=(0,u_{k-1}) <-> (u_{k-1},0)",
        "rect_side": cons[0].side,
    }
    return PerronBlock(n, d, triangles, taus, eps, cons, trapezia, rects, method, h, c_i, metadata=meta)


# --- lattice scale ---------------------------------------------------------

@dataclass(frozen=True)
class DeltaCheck:
    delta: float
    compression_ratio: float
    compression_ok: bool
    trapezium_worst: float
    trapezium_ok: bool
    v_ratio: float
    v_ok: bool

    @property
    def ok(self) -> bool:
        return self.compression_ok and self.trapezium_ok and self.v_ok


@dataclass(frozen=True)
class DeltaSelection:
    delta: float | None
    trace: list[DeltaCheck]

    @property
    def found(self) -> bool:
        return self.delta is not None


def check_delta(block: PerronBlock, delta: float, samples_per_triangle: int = 50, seed: int = 0) -> DeltaCheck:
    """Evaluate the three lattice conditions at one scale.

    (a) #(dK) / #(d hull) <= 3 epsilon; (b) every triangle's discrete
    trapezium ratio clears its threshold; (c) #(dV) >= (1/2)(1/9) #(d hull).
    """
    K, V, hull, _ = block.scaled(delta)
    n_hull = count_points(hull)
    n_K = int(rasterize(K)[0].sum())
    n_V = int(rasterize(V)[0].sum())
    comp = n_K / n_hull
    worst = math.inf
    trap_ok = True
    for cons in block.constructions:
        pts = discrete_samples(cons, seed, samples_per_triangle)
        w = worst_discrete_ratio(cons, delta, pts)
        thr = discrete_threshold(cons)
        worst = min(worst, w / thr)
        trap_ok &= w >= thr
    v_ratio = n_V / n_hull
    return DeltaCheck(float(delta), comp, comp <= 3 * block.epsilon, worst, trap_ok,
                      v_ratio, v_ratio >= 0.5 * SIMILAR_COPY_FRACTION)


def select_delta(block: PerronBlock, delta_grid: Sequence[float], **kw) -> DeltaSelection:
    """Smallest scale in ``delta_grid`` meeting all of :func:`check_delta`'s conditions."""
    trace = []
    for d in delta_grid:
        chk = check_delta(block, d, **kw)
        trace.append(chk)
        if chk.ok:
            return DeltaSelection(float(d), trace)
    return DeltaSelection(None, trace)
