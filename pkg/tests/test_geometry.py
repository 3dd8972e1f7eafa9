import math

import numpy as np
import pytest

from perron_lab.geometry import (
    ConvexPolygon,
    GeometryError,
    PolygonFamily,
    TiltedRect,
    area,
    clip,
    clip_area,
    enlarge_rect,
    point,
    rect_to_polygon,
    transform,
    translate,
    union_area,
)

UNIT = ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
TRI = ConvexPolygon([(1, 0), (0, 1), (0, 0)])


def random_convex(rng, n=8, scale=1.0, center=(0.0, 0.0)):
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    rad = rng.uniform(0.5, 1.0, n) * scale
    pts = np.stack([center[0] + rad * np.cos(ang), center[1] + rad * np.sin(ang)], axis=1)
    from scipy.spatial import ConvexHull
    return ConvexPolygon(pts[ConvexHull(pts).vertices])


def mc_union_area(polys, n, rng):
    xs = np.concatenate([p.xs for p in polys])
    ys = np.concatenate([p.ys for p in polys])
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    box = (x1 - x0) * (y1 - y0)
    hits = 0
    chunk = 1_000_000
    for _ in range(n // chunk):
        px = rng.uniform(x0, x1, chunk)
        py = rng.uniform(y0, y1, chunk)
        inside = np.zeros(chunk, dtype=bool)
        for p in polys:
            v = p.xs, p.ys
            ok = np.ones(chunk, dtype=bool)
            for i in range(len(p)):
                ax, ay = v[0][i], v[1][i]
                bx, by = v[0][(i + 1) % len(p)], v[1][(i + 1) % len(p)]
                ok &= (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0
            inside |= ok
        hits += inside.sum()
    frac = hits / n
    return box * frac, box * math.sqrt(frac * (1 - frac) / n)


def test_area_examples():
    assert area(UNIT) == pytest.approx(1.0)
    assert area(TRI) == pytest.approx(0.5)
    assert area(ConvexPolygon([(0, 1), (0, 0), (1, 0)])) == pytest.approx(0.5)


def test_polygon_normalises_orientation_and_drops_collinear():
    p = ConvexPolygon([(0, 1), (1, 1), (1, 0), (0.5, 0), (0, 0)])
    assert len(p) == 4
    assert area(p) == pytest.approx(1.0)


@pytest.mark.parametrize("verts", [
    [(0, 0), (1, 0), (2, 0)],
    [(0, 0), (2, 0), (1, 0.2), (1, 2)],
    [(0, 0), (1, 1)],
])
def test_polygon_rejects_bad_input(verts):
    with pytest.raises(GeometryError):
        ConvexPolygon(verts)


def test_point_rejects_nan():
    with pytest.raises(GeometryError):
        point(float("nan"), 0)


def test_clip_examples():
    assert area(clip(UNIT, UNIT)) == pytest.approx(1.0, rel=1e-9)
    assert clip(UNIT, translate(UNIT, 5, 5)) is None
    sq = ConvexPolygon([(-0.75, 0.25), (0.75, 0.25), (0.75, 1.75), (-0.75, 1.75)])
    assert area(clip(sq, TRI)) == pytest.approx(9 / 32, abs=1e-12)


def test_clip_commutes_in_area():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = random_convex(rng, center=rng.uniform(-0.5, 0.5, 2))
        q = random_convex(rng, center=rng.uniform(-0.5, 0.5, 2))
        assert clip_area(p, q) == pytest.approx(clip_area(q, p), rel=1e-9, abs=1e-12)


def test_union_examples():
    assert union_area([UNIT, translate(UNIT, 3, 0)]) == pytest.approx(2.0)
    assert union_area([UNIT, UNIT]) == pytest.approx(1.0)


def test_union_matches_monte_carlo():
    base = ConvexPolygon([(0, 1), (0, 0), (1, 0)])
    fam = [base, translate(base, 0.5, 0)]
    exact = union_area(fam)
    assert exact == pytest.approx(0.875)
    est, sigma = mc_union_area(fam, 10_000_000, np.random.default_rng(0))
    assert abs(est - exact) <= 3 * sigma


def test_union_matches_monte_carlo_random_families():
    rng = np.random.default_rng(2)
    for _ in range(3):
        fam = [random_convex(rng, center=rng.uniform(-1, 1, 2)) for _ in range(5)]
        est, sigma = mc_union_area(fam, 2_000_000, rng)
        assert abs(est - union_area(fam)) <= 4 * sigma


def test_union_bounds_and_disjoint_additivity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        fam = [random_convex(rng, center=rng.uniform(-2, 2, 2)) for _ in range(4)]
        u = union_area(fam)
        assert max(area(p) for p in fam) - 1e-12 <= u <= sum(area(p) for p in fam) + 1e-12
        spread = [translate(p, 5 * i, 0) for i, p in enumerate(fam)]
        assert union_area(spread) == pytest.approx(sum(area(p) for p in fam), rel=1e-9)


def test_union_of_block_triangles_is_hull():
    tris = [ConvexPolygon([(0, 1), (k - 1, 0), (k, 0)]) for k in range(2, 4)]
    assert union_area(tris) == pytest.approx(1.0)


def test_polygon_family_rejects_empty():
    with pytest.raises(ValueError):
        PolygonFamily([])


def test_transform_examples():
    assert area(transform(UNIT, (0, 0), 3)) == pytest.approx(9.0)
    assert area(transform(TRI, (5, -2), 1)) == pytest.approx(0.5)
    assert area(transform(TRI, (0, 0), 200)) == pytest.approx(20000.0)
    with pytest.raises(GeometryError):
        transform(UNIT, (0, 0), 0)


def test_transform_scales_area_quadratically():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        p = random_convex(rng, n=6)
        s = float(rng.uniform(0.1, 100))
        assert area(transform(p, rng.uniform(-5, 5, 2), s)) == pytest.approx(s * s * area(p), rel=1e-9)


def test_tilted_rect_basics():
    r = TiltedRect.from_sides((1, 2), 2.0, 10.0, 0.0)
    assert r.long_side == pytest.approx(10.0)
    assert r.short_side == pytest.approx(2.0)
    assert r.angle == pytest.approx(math.pi / 2)
    assert area(rect_to_polygon(r)) == pytest.approx(20.0)
    with pytest.raises(GeometryError):
        TiltedRect(point(0, 0), 1.0, 2.0, 0.0)


def test_rect_polygon_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(200):
        lh = float(rng.uniform(0.1, 50))
        sh = float(rng.uniform(0.05, lh))
        r = TiltedRect(point(*rng.uniform(-9, 9, 2)), lh, sh, float(rng.uniform(0, 7)))
        assert area(rect_to_polygon(r)) == pytest.approx(4 * lh * sh, rel=1e-9)


def test_slope_invariant_under_translation_and_scaling():
    r = TiltedRect(point(0, 0), 5.0, 1.0, math.atan(1 / 3))
    assert r.slope() == pytest.approx(1 / 3)
    moved = transform(r, (3.5, -7), 4.2)
    assert moved.slope() == pytest.approx(r.slope(), rel=1e-12)


def test_square_slope_uses_smallest_angle():
    sq = TiltedRect(point(0, 0), 1.0, 1.0, math.radians(70))
    assert abs(sq.slope()) == pytest.approx(math.tan(math.radians(20)))
    assert abs(math.atan(sq.slope())) <= math.pi / 4 + 1e-15


def test_enlarge_rect_examples():
    sq = TiltedRect(point(0, 0), 0.5, 0.5, 0.0)
    assert enlarge_rect(sq, 0) == sq
    big = enlarge_rect(sq, math.sqrt(2))
    assert big.area == pytest.approx((1 + 2 * math.sqrt(2)) ** 2)
    assert big.area / sq.area <= 9 + 4 * math.sqrt(2) + 1e-9
    r = TiltedRect(point(0, 0), 5.0, 1.0, 0.4)
    ratio = enlarge_rect(r, math.sqrt(2)).area / r.area
    assert ratio == pytest.approx((2 + 2 * math.sqrt(2)) * (10 + 2 * math.sqrt(2)) / 20)
    assert ratio <= 9 + 4 * math.sqrt(2)
