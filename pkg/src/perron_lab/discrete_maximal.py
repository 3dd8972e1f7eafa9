"""Averages of lattice functions over translated rectangles, and their maximal function.

``A_R phi(k, l)`` is the mean of ``phi(k + i, l + j)`` over the lattice points
``(i, j)`` of the closed rectangle ``R``; the maximal function is the
pointwise max over a finite family. Offsets are always summed in row-major
order (by ``j``, then ``i``), so vectorised and point-by-point evaluations
agree bit for bit. Integer-valued inputs take an FFT route whose rounded
sums are exact integers, hence again identical; when the FFT would not fit
in memory they use exact cumulative sums along each kernel row instead.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
import scipy.fft
from scipy.signal import fftconvolve, oaconvolve

from .geometry import TiltedRect
from .lattice import Box, LatticeSet, count_points, enumerate_points, rasterize

# below this many offset additions the plain loop beats the FFT
FFT_MIN_WORK = 2_000_000
# larger inputs use overlap-add to bound FFT memory
OA_MIN_SIZE = 4_000_000
# FFT routes whose padded transform would exceed this many bytes fall back
# to per-row prefix sums
FFT_MAX_BYTES = 1_000_000_000


def worker_count() -> int:
    """Worker threads from ``PERRON_LAB_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("PERRON_LAB_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("PERRON_LAB_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


@dataclass(frozen=True)
class GridFunction:
    """Finitely supported function on Z^2; ``values[y - ymin, x - xmin]``, zero off-window."""

    window: Box
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.window.shape:
            raise ValueError(f"values shape {v.shape} does not match window {self.window.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, window: Box) -> "GridFunction":
        return cls(window, np.zeros(window.shape))

    @classmethod
    def indicator(cls, E: LatticeSet | Iterable[tuple[int, int]], window: Box | None = None) -> "GridFunction":
        if not isinstance(E, LatticeSet):
            pts = np.array(sorted(set(map(tuple, E))), dtype=np.int64).reshape(-1, 2)
            E = LatticeSet(pts, Box(int(pts[:, 0].min()), int(pts[:, 0].max()),
                                    int(pts[:, 1].min()), int(pts[:, 1].max())) if len(pts) else Box(0, -1, 0, -1))
        w = window or E.window
        return cls(w, E.mask(w).astype(float))

    def __call__(self, x: int, y: int) -> float:
        w = self.window
        if w.contains(x, y):
            return float(self.values[y - w.ymin, x - w.xmin])
        return 0.0

    def abs(self) -> "GridFunction":
        return GridFunction(self.window, np.abs(self.values))

    def scaled(self, t: float) -> "GridFunction":
        return GridFunction(self.window, t * self.values)

    def shifted(self, dx: int, dy: int) -> "GridFunction":
        return GridFunction(self.window.shift(dx, dy), self.values)

    def lp_norm_p(self, p: float) -> float:
        """``sum |phi|^p``"""
        return float(np.sum(np.abs(self.values) ** p))

    def support_box(self) -> Box | None:
        ys, xs = np.nonzero(self.values)
        if len(xs) == 0:
            return None
        w = self.window
        return Box(int(xs.min()) + w.xmin, int(xs.max()) + w.xmin, int(ys.min()) + w.ymin, int(ys.max()) + w.ymin)

    def is_integral(self) -> bool:
        v = self.values
        return bool(np.all(v == np.rint(v))) and float(np.abs(v).sum()) < 2.0 ** 52


@dataclass(frozen=True)
class RectFamily:
    """Finite family of closed rectangles with their cached lattice offsets."""

    rects: tuple[TiltedRect, ...]
    offsets: tuple[np.ndarray, ...]

    def __init__(self, rects: Iterable[TiltedRect], require_origin: bool = True):
        rects = tuple(rects)
        if not rects:
            raise ValueError("rectangle family must be non-empty")
        offs = []
        for r in rects:
            if require_origin and not r.to_polygon().contains((0.0, 0.0)):
                raise ValueError(f"rectangle {r} does not contain the origin")
            pts = enumerate_points(r).points
            if len(pts) == 0:
                raise ValueError(f"rectangle {r} contains no lattice point")
            offs.append(pts)
        object.__setattr__(self, "rects", rects)
        object.__setattr__(self, "offsets", tuple(offs))

    def __len__(self) -> int:
        return len(self.rects)

    def __iter__(self):
        return iter(self.rects)

    def __add__(self, other: "RectFamily") -> "RectFamily":
        return RectFamily(self.rects + other.rects, require_origin=False)

    @property
    def short_sides(self) -> list[float]:
        return [r.short_side for r in self.rects]

    @property
    def counts(self) -> list[int]:
        return [len(o) for o in self.offsets]

    def offset_box(self) -> Box:
        allp = np.concatenate(self.offsets)
        return Box(int(allp[:, 0].min()), int(allp[:, 0].max()), int(allp[:, 1].min()), int(allp[:, 1].max()))


def _offsets_of(r: TiltedRect | np.ndarray) -> np.ndarray:
    if isinstance(r, TiltedRect):
        return enumerate_points(r).points
    return r


def average(phi: GridFunction, r: TiltedRect | np.ndarray, at: tuple[int, int]) -> float:
    """Mean of ``phi`` over ``at + (R ∩ Z^2)``."""
    offs = _offsets_of(r)
    if len(offs) == 0:
        raise ValueError("rectangle contains no lattice point")
    k, l = at
    w, vals = phi.window, phi.values
    s = 0.0
    for i, j in offs.tolist():
        x, y = k + i, l + j
        if w.xmin <= x <= w.xmax and w.ymin <= y <= w.ymax:
            s += float(vals[y - w.ymin, x - w.xmin])
        else:
            s += 0.0  # same as phi(x, y) outside the window
    return s / len(offs)


def _embed(phi: GridFunction, region: Box) -> np.ndarray:
    out = np.zeros(region.shape)
    w = phi.window
    x0, x1 = max(w.xmin, region.xmin), min(w.xmax, region.xmax)
    y0, y1 = max(w.ymin, region.ymin), min(w.ymax, region.ymax)
    if x1 >= x0 and y1 >= y0:
        out[y0 - region.ymin:y1 - region.ymin + 1, x0 - region.xmin:x1 - region.xmin + 1] = \
            phi.values[y0 - w.ymin:y1 - w.ymin + 1, x0 - w.xmin:x1 - w.xmin + 1]
    return out


def _sums_direct(big: np.ndarray, region: Box, offs: np.ndarray, ev: Box) -> np.ndarray:
    h, w = ev.shape
    acc = np.zeros((h, w))
    for i, j in offs:
        y0 = ev.ymin + int(j) - region.ymin
        x0 = ev.xmin + int(i) - region.xmin
        acc += big[y0:y0 + h, x0:x0 + w]
    return acc


def _sums_fft(big: np.ndarray, region: Box, offs: np.ndarray, ev: Box) -> np.ndarray | None:
    ob = Box(int(offs[:, 0].min()), int(offs[:, 0].max()), int(offs[:, 1].min()), int(offs[:, 1].max()))
    kern = np.zeros(ob.shape)
    kern[offs[:, 1] - ob.ymin, offs[:, 0] - ob.xmin] = 1.0
    sub = big[ev.ymin + ob.ymin - region.ymin: ev.ymax + ob.ymax - region.ymin + 1,
              ev.xmin + ob.xmin - region.xmin: ev.xmax + ob.xmax - region.xmin + 1]
    conv = oaconvolve if sub.size > OA_MIN_SIZE else fftconvolve
    raw = conv(sub, kern[::-1, ::-1], mode="valid")
    rounded = np.rint(raw)
    if rounded.shape != ev.shape or np.max(np.abs(raw - rounded), initial=0.0) > 0.25:
        return None
    return rounded


def _row_runs(offs: np.ndarray) -> list[tuple[int, int, int]]:
    """Row-major offsets of a convex set as ``(j, i_first, i_last)`` runs."""
    runs = []
    j_vals, starts = np.unique(offs[:, 1], return_index=True)
    ends = np.append(starts[1:], len(offs))
    for j, a, b in zip(j_vals, starts, ends):
        xs = offs[a:b, 0]
        if xs[-1] - xs[0] + 1 != len(xs):
            raise ValueError("offsets are not contiguous within a row")
        runs.append((int(j), int(xs[0]), int(xs[-1])))
    return runs


def _sums_rowprefix(big: np.ndarray, region: Box, offs: np.ndarray, ev: Box) -> np.ndarray:
    """Integer sums via cumulative sums along x, one pass per kernel row."""
    total = float(np.abs(big).sum())
    dtype = np.int32 if total < 2 ** 31 - 1 else np.int64
    cum = np.zeros((big.shape[0], big.shape[1] + 1), dtype=dtype)
    np.cumsum(big.astype(dtype), axis=1, out=cum[:, 1:])
    h, w = ev.shape
    acc = np.zeros((h, w), dtype=np.int64 if dtype == np.int64 else np.int32)
    for j, a, b in _row_runs(offs):
        y0 = ev.ymin + j - region.ymin
        x0 = ev.xmin - region.xmin
        rows = cum[y0:y0 + h]
        acc += rows[:, x0 + b + 1:x0 + b + 1 + w]
        acc -= rows[:, x0 + a:x0 + a + w]
    return acc.astype(float)


def _fft_bytes(shape_a: tuple[int, int], shape_b: tuple[int, int]) -> int:
    n = (shape_a[0] + shape_b[0]) * (shape_a[1] + shape_b[1])
    return 3 * 16 * n // 2


def rect_sums(phi: GridFunction, offs: np.ndarray, eval_window: Box, method: str = "auto") -> np.ndarray:
    """``sum_{o in offs} phi(y + o)`` for every ``y`` in ``eval_window``.

    ``method`` is ``"direct"`` (fixed summation order, any input), or for
    integer-valued input ``"fft"`` / ``"rowprefix"``; ``"auto"`` chooses.
    """
    ob = Box(int(offs[:, 0].min()), int(offs[:, 0].max()), int(offs[:, 1].min()), int(offs[:, 1].max()))
    region = Box(eval_window.xmin + ob.xmin, eval_window.xmax + ob.xmax,
                 eval_window.ymin + ob.ymin, eval_window.ymax + ob.ymax)
    big = _embed(phi, region)
    if method == "auto":
        if not phi.is_integral() or len(offs) * eval_window.size <= FFT_MIN_WORK:
            method = "direct"
        elif _fft_bytes(region.shape, ob.shape) > FFT_MAX_BYTES:
            method = "rowprefix"
        else:
            method = "fft"
    if method in ("fft", "rowprefix") and not phi.is_integral():
        raise ValueError(f"method {method!r} needs integer-valued input")
    if method == "rowprefix":
        return _sums_rowprefix(big, region, offs, eval_window)
    if method == "fft":
        out = _sums_fft(big, region, offs, eval_window)
        if out is not None:
            return out
    return _sums_direct(big, region, offs, eval_window)


def hull_window(phi: GridFunction, fam: RectFamily, pad: int = 1) -> Box:
    """Points where some average of ``|phi|`` can be non-zero, padded by ``pad``."""
    sb = phi.support_box()
    if sb is None:
        return Box(0, 0, 0, 0)
    ob = fam.offset_box()
    return Box(sb.xmin - ob.xmax, sb.xmax - ob.xmin, sb.ymin - ob.ymax, sb.ymax - ob.ymin).pad(pad)


def averages(phi: GridFunction, fam: RectFamily, eval_window: Box, method: str = "auto") -> Iterator[np.ndarray]:
    """Yield ``A_R |phi|`` on ``eval_window`` for each rectangle, in family order."""
    a = phi.abs()

    def one(offs):
        return rect_sums(a, offs, eval_window, method) / len(offs)

    threads = min(worker_count(), len(fam))
    if threads > 1:
        with scipy.fft.set_workers(1), ThreadPoolExecutor(threads) as ex:
            yield from ex.map(one, fam.offsets)
    else:
        for o in fam.offsets:
            yield one(o)


def maximal(phi: GridFunction, fam: RectFamily, eval_window: Box | None = None, method: str = "auto") -> GridFunction:
    """Pointwise max over the family of ``A_R |phi|`` on ``eval_window``.

    Defaults to :func:`hull_window`, outside of which the result vanishes.
    """
    ev = eval_window or hull_window(phi, fam)
    out = np.zeros(ev.shape)
    for arr in averages(phi, fam, ev, method):
        np.maximum(out, arr, out=out)
    return GridFunction(ev, out)


def maximal_bruteforce(phi: GridFunction, fam: RectFamily, eval_window: Box) -> GridFunction:
    """Reference double loop, one point at a time."""
    out = np.zeros(eval_window.shape)
    a = phi.abs()
    for y in range(eval_window.ymin, eval_window.ymax + 1):
        for x in range(eval_window.xmin, eval_window.xmax + 1):
            best = 0.0
            for offs in fam.offsets:
                best = max(best, average(a, offs, (x, y)))
            out[y - eval_window.ymin, x - eval_window.xmin] = best
    return GridFunction(eval_window, out)


def superlevel_count(g: GridFunction, lam: float) -> int:
    """``#{y : g(y) >= lam}``"""
    if not lam > 0:
        raise ValueError("level must be positive")
    return int(np.count_nonzero(g.values >= lam))


def tauberian_ratio(E: LatticeSet, fam: RectFamily, lam: float) -> float:
    """``#{A* chi_E >= lam} / #E``."""
    if len(E) == 0:
        raise ValueError("E must be non-empty")
    phi = GridFunction.indicator(E)
    return superlevel_count(maximal(phi, fam), lam) / len(E)


def weak_p_witness(phi: GridFunction, fam: RectFamily, lam: float, p: float,
                   max_fn: GridFunction | None = None) -> float:
    """``lam^p #{A* phi >= lam} / ||phi||_p^p``; pass ``max_fn`` to reuse a computed maximal function."""
    if not 1 <= p < math.inf:
        raise ValueError("need 1 <= p < inf")
    norm = phi.lp_norm_p(p)
    if norm == 0:
        raise ValueError("phi must be non-zero")
    g = max_fn if max_fn is not None else maximal(phi, fam)
    return lam ** p * superlevel_count(g, lam) / norm


# --- Perron blocks on the lattice -------------------------------------------

@dataclass(frozen=True)
class BlockLattice:
    """Lattice data of a scaled Perron block: E = dK ∩ Z^2, dV ∩ Z^2 and A* chi_E."""

    delta: float
    E: LatticeSet
    V_mask: np.ndarray
    window: Box
    family: RectFamily
    max_fn: GridFunction
    n_hull: int

    @property
    def V_count(self) -> int:
        return int(self.V_mask.sum())

    def V_values(self) -> np.ndarray:
        """A* chi_E at the points of dV ∩ Z^2."""
        ev = self.max_fn.window
        ys, xs = np.nonzero(self.V_mask)
        xs = xs + self.window.xmin
        ys = ys + self.window.ymin
        inside = (xs >= ev.xmin) & (xs <= ev.xmax) & (ys >= ev.ymin) & (ys <= ev.ymax)
        vals = np.zeros(len(xs))
        vals[inside] = self.max_fn.values[ys[inside] - ev.ymin, xs[inside] - ev.xmin]
        return vals


def block_lattice(block) -> BlockLattice:
    """Rasterise a Perron block at its selected scale and evaluate A* chi_E."""
    if block.delta is None:
        raise ValueError("block has no lattice scale; run select_delta first")
    K, V, hull, rects = block.scaled(block.delta)
    k_mask, kw = rasterize(K)
    v_mask, vw = rasterize(V)
    window = kw.union(vw)
    k_mask, _ = rasterize(K, window)
    v_mask, _ = rasterize(V, window)
    E = LatticeSet.from_mask(k_mask, window)
    fam = RectFamily(rects)
    phi = GridFunction(window, k_mask.astype(float))
    g = maximal(phi, fam)
    return BlockLattice(block.delta, E, v_mask, window, fam, g, count_points(hull))


def measure_t0(block, lattice: BlockLattice | None = None) -> float:
    """Smallest value of A* chi_{dK} over dV ∩ Z^2."""
    lat = lattice or block_lattice(block)
    if lat.V_count == 0:
        raise ValueError("scaled trapezia contain no lattice point; scale too small")
    t0 = float(lat.V_values().min())
    if not t0 > 0:
        raise ValueError("A* chi_E vanishes somewhere on the trapezia")
    return t0
