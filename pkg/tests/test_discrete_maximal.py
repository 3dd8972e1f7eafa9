import math

import numpy as np
import pytest

from perron_lab.directions import gen_power
from perron_lab.discrete_maximal import (
    GridFunction,
    RectFamily,
    average,
    block_lattice,
    hull_window,
    maximal,
    maximal_bruteforce,
    measure_t0,
    rect_sums,
    superlevel_count,
    tauberian_ratio,
    weak_p_witness,
    worker_count,
)
from perron_lab.geometry import TiltedRect, point
from perron_lab.lattice import Box, LatticeSet
from perron_lab.perron_tree import assemble_block

SQUARE9 = TiltedRect(point(0, 0), 1.0, 1.0, 0.0)


def random_family(rng, n, max_half=4.0):
    rects = []
    for _ in range(n):
        lh = float(rng.uniform(0.5, max_half))
        sh = float(rng.uniform(0.3, lh))
        rects.append(TiltedRect(point(*rng.uniform(-0.4, 0.4, 2)), lh, sh, float(rng.uniform(0, math.pi))))
    return RectFamily(rects)


def random_phi(rng, shape=(40, 40), integral=False):
    window = Box(0, shape[1] - 1, 0, shape[0] - 1)
    vals = rng.integers(0, 2, shape).astype(float) if integral else rng.normal(size=shape)
    return GridFunction(window, vals)


def point_set(pts):
    pts = np.array(sorted(pts, key=lambda p: (p[1], p[0])), dtype=np.int64)
    return LatticeSet(pts, Box(int(pts[:, 0].min()), int(pts[:, 0].max()), int(pts[:, 1].min()), int(pts[:, 1].max())))


def test_average_examples():
    ones = GridFunction(Box(-10, 10, -10, 10), np.ones((21, 21)))
    assert average(ones, SQUARE9, (0, 0)) == 1.0
    delta = GridFunction.indicator([(0, 0)])
    assert average(delta, SQUARE9, (0, 0)) == pytest.approx(1 / 9)
    assert average(delta, SQUARE9, (5, 5)) == 0.0


def test_maximal_examples():
    rng = np.random.default_rng(0)
    fam = random_family(rng, 3)
    zero = GridFunction.zeros(Box(0, 9, 0, 9))
    assert not maximal(zero, fam, Box(-5, 15, -5, 15)).values.any()
    phi = random_phi(rng, integral=True)
    g = maximal(phi, fam)
    assert g.values.min() >= 0 and g.values.max() <= 1


@pytest.mark.parametrize("integral", [False, True])
def test_maximal_equals_bruteforce(integral):
    rng = np.random.default_rng(1 + integral)
    for _ in range(3):
        fam = random_family(rng, 5)
        phi = random_phi(rng, (12, 14), integral)
        ev = Box(-3, 16, -3, 14)
        assert np.array_equal(maximal(phi, fam, ev).values, maximal_bruteforce(phi, fam, ev).values)


def test_sum_methods_agree_on_integer_input():
    rng = np.random.default_rng(3)
    phi = random_phi(rng, (60, 80), integral=True)
    offs = RectFamily([TiltedRect(point(0, 0), 20.0, 3.0, 0.3)]).offsets[0]
    ev = Box(-10, 90, -10, 70)
    direct = rect_sums(phi, offs, ev, "direct")
    assert np.array_equal(direct, rect_sums(phi, offs, ev, "fft"))
    assert np.array_equal(direct, rect_sums(phi, offs, ev, "rowprefix"))
    with pytest.raises(ValueError):
        rect_sums(random_phi(rng, (5, 5)), offs, ev, "rowprefix")


def test_maximal_dominates_every_average():
    rng = np.random.default_rng(4)
    fam = random_family(rng, 4)
    phi = random_phi(rng, (15, 15))
    ev = Box(-2, 17, -2, 17)
    g = maximal(phi, fam, ev)
    for x, y in [(0, 0), (7, 3), (12, 12), (-2, 5)]:
        for offs in fam.offsets:
            assert g(x, y) >= average(phi.abs(), offs, (x, y))


def test_maximal_over_union_family():
    rng = np.random.default_rng(5)
    f1, f2 = random_family(rng, 3), random_family(rng, 2)
    phi = random_phi(rng, (20, 20), integral=True)
    ev = Box(-5, 25, -5, 25)
    both = maximal(phi, f1 + f2, ev).values
    assert np.array_equal(both, np.maximum(maximal(phi, f1, ev).values, maximal(phi, f2, ev).values))


def test_translation_equivariance():
    rng = np.random.default_rng(6)
    fam = random_family(rng, 4)
    phi = random_phi(rng, (20, 20))
    ev = Box(-4, 24, -4, 24)
    g = maximal(phi, fam, ev).values
    moved = maximal(phi.shifted(7, -3), fam, ev.shift(7, -3)).values
    assert np.array_equal(g, moved)


def test_average_is_linear_and_monotone():
    rng = np.random.default_rng(7)
    phi, psi = random_phi(rng, (10, 10)), random_phi(rng, (10, 10))
    both = GridFunction(phi.window, phi.values + 2 * psi.values)
    r = TiltedRect(point(0, 0), 3.0, 1.5, 0.4)
    lhs = average(both, r, (4, 4))
    assert lhs == pytest.approx(average(phi, r, (4, 4)) + 2 * average(psi, r, (4, 4)))
    bigger = GridFunction(phi.window, np.maximum(phi.values, psi.values))
    assert average(bigger, r, (4, 4)) >= average(phi, r, (4, 4))


def test_hull_window_contains_support_of_maximal():
    rng = np.random.default_rng(8)
    fam = random_family(rng, 3)
    phi = GridFunction.indicator([(3, 4), (10, -2)])
    hw = hull_window(phi, fam)
    big = hw.pad(6)
    g = maximal(phi, fam, big).values
    inner = np.zeros_like(g, dtype=bool)
    inner[6:-6, 6:-6] = True
    assert not g[~inner].any()


def test_superlevel_examples():
    g = GridFunction.zeros(Box(0, 4, 0, 4))
    assert superlevel_count(g, 0.5) == 0
    E = point_set([(0, 0), (1, 0), (3, 2)])
    assert superlevel_count(GridFunction.indicator(E), 1.0) == len(E)
    with pytest.raises(ValueError):
        superlevel_count(g, 0)


def test_tauberian_examples():
    E = point_set([(0, 0)])
    fam = RectFamily([SQUARE9])
    assert tauberian_ratio(E, fam, 1 / 9) == pytest.approx(9.0)
    assert tauberian_ratio(E, fam, 1.5) == 0.0
    r = TiltedRect(point(0, 0), 4.0, 1.2, 0.35)
    fam = RectFamily([r])
    m = fam.counts[0]
    assert tauberian_ratio(E, fam, 1 / m) == pytest.approx(m)


def test_weak_p_examples():
    phi = GridFunction.indicator([(0, 0)])
    fam = RectFamily([SQUARE9])
    assert weak_p_witness(phi, fam, 1 / 9, 2) == pytest.approx(1 / 9)
    rng = np.random.default_rng(9)
    phi = random_phi(rng, (20, 20), integral=True)
    fam = random_family(rng, 4)
    w = weak_p_witness(phi, fam, 0.3, 2)
    scaled = weak_p_witness(phi.scaled(7), fam, 2.1, 2)
    assert scaled == pytest.approx(w, rel=1e-12)


def test_rect_family_requires_origin():
    with pytest.raises(ValueError):
        RectFamily([TiltedRect(point(10, 10), 1.0, 1.0, 0.0)])
    with pytest.raises(ValueError):
        RectFamily([])


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("PERRON_LAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("PERRON_LAB_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("PERRON_LAB_THREADS", "-1")
    with pytest.raises(ValueError):
        worker_count()


def test_threaded_and_serial_agree(monkeypatch):
    rng = np.random.default_rng(10)
    fam = random_family(rng, 6)
    phi = random_phi(rng, (30, 30))
    ev = Box(-5, 35, -5, 35)
    monkeypatch.setenv("PERRON_LAB_THREADS", "1")
    serial = maximal(phi, fam, ev).values
    monkeypatch.setenv("PERRON_LAB_THREADS", "4")
    assert np.array_equal(serial, maximal(phi, fam, ev).values)


def test_measure_t0_on_first_block():
    block = assemble_block(gen_power(1, 3), 0).with_delta(16.0)
    lat = block_lattice(block)
    t0 = measure_t0(block, lat)
    assert 0 < t0 <= 1
    assert lat.V_count > 0
    with pytest.raises(ValueError):
        block_lattice(assemble_block(gen_power(1, 3), 0))
