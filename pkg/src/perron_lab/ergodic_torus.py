"""Two commuting circle translations and their rectangle averages.

``S x = x + alpha`` and ``T x = x + beta`` on [0, 1) with Lebesgue measure.
Each translation is ergodic when its angle is irrational, and they commute
exactly. Averages run over the lattice points of a rectangle ``R``:

    M_R f(x) = mean of f(S^i T^j x) over (i, j) in R ∩ Z^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .discrete_maximal import GridFunction, RectFamily, average, rect_sums
from .geometry import TiltedRect
from .lattice import Box, enumerate_points

DEFAULT_ALPHA = math.sqrt(2) - 1
DEFAULT_BETA = math.sqrt(3) - 1
# continued-fraction screen for near-rational angles
MAX_DENOMINATOR = 10 ** 6
RATIONAL_TOL = 1e-9
KINDS = ("trig-polynomial", "interval-indicator", "coboundary")


def _looks_rational(x: float) -> Fraction | None:
    q = Fraction(x).limit_denominator(MAX_DENOMINATOR - 1)
    if abs(q.denominator * x - q.numerator) < RATIONAL_TOL:
        return q
    return None


@dataclass(frozen=True)
class TorusSystem:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        for name, v in (("alpha", self.alpha), ("beta", self.beta)):
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.beta == 0:
            raise ValueError("beta must be non-zero")
        for name, v in (("alpha", self.alpha), ("beta", self.beta), ("alpha/beta", self.alpha / self.beta)):
            q = _looks_rational(v)
            if q is not None:
                raise ValueError(f"{name} = {v!r} is within {RATIONAL_TOL} of {q} (denominator < {MAX_DENOMINATOR})")

    def orbit(self, x0: float, i, j) -> np.ndarray:
        """``S^i T^j x0`` for integer arrays ``i``, ``j``."""
        i = np.asarray(i, dtype=float)
        j = np.asarray(j, dtype=float)
        return np.mod(x0 + i * self.alpha + j * self.beta, 1.0)

    def S(self, x):
        return np.mod(np.asarray(x, dtype=float) + self.alpha, 1.0)

    def T(self, x):
        return np.mod(np.asarray(x, dtype=float) + self.beta, 1.0)


@dataclass(frozen=True)
class ObservedFunction:
    """An observable on [0, 1) whose integral is known in closed form."""

    kind: str
    params: dict = field(compare=False)
    exact_integral: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "trig-polynomial":
            out = np.full(x.shape, p["const"])
            for m, (a, b) in enumerate(zip(p["cos"], p["sin"]), start=1):
                if a:
                    out = out + a * np.cos(2 * np.pi * m * x)
                if b:
                    out = out + b * np.sin(2 * np.pi * m * x)
            return out
        if self.kind == "interval-indicator":
            return ((x >= p["a"]) & (x < p["b"])).astype(float)
        g, beta = p["g"], p["beta"]
        return p["const"] + (g(x) - g(np.mod(x + beta, 1.0)))

    @property
    def sup_abs(self) -> float:
        """An upper bound on sup |f| (exact for single harmonics and indicators)."""
        p = self.params
        if self.kind == "trig-polynomial":
            return abs(p["const"]) + sum(math.hypot(a, b) for a, b in zip(p["cos"], p["sin"]))
        if self.kind == "interval-indicator":
            return 1.0 if p["b"] > p["a"] else 0.0
        return abs(p["const"]) + 2 * p["g"].sup_abs

    @property
    def degree(self) -> int:
        if self.kind != "trig-polynomial":
            raise ValueError("degree is defined for trig polynomials only")
        nz = [m for m, (a, b) in enumerate(zip(self.params["cos"], self.params["sin"]), start=1) if a or b]
        return max(nz, default=0)


def trig_polynomial(const: float = 0.0, cos: Sequence[float] = (), sin: Sequence[float] = ()) -> ObservedFunction:
    """``const + sum_m cos[m-1] cos(2 pi m x) + sin[m-1] sin(2 pi m x)``."""
    cos, sin = list(map(float, cos)), list(map(float, sin))
    n = max(len(cos), len(sin))
    cos += [0.0] * (n - len(cos))
    sin += [0.0] * (n - len(sin))
    return ObservedFunction("trig-polynomial", {"const": float(const), "cos": tuple(cos), "sin": tuple(sin)},
                            float(const))


def constant(c: float) -> ObservedFunction:
    return trig_polynomial(c)


def interval_indicator(a: float, b: float) -> ObservedFunction:
    """Indicator of ``[a, b)`` with ``0 <= a <= b <= 1``."""
    if not 0 <= a <= b <= 1:
        raise ValueError(f"need 0 <= a <= b <= 1, got [{a}, {b})")
    return ObservedFunction("interval-indicator", {"a": float(a), "b": float(b)}, float(b - a))


def coboundary(g: ObservedFunction, sys: TorusSystem, const: float = 0.0) -> ObservedFunction:
    """``const + g - g∘T``; integrates to ``const``."""
    return ObservedFunction("coboundary", {"g": g, "beta": sys.beta, "const": float(const)}, float(const))


# --- averages ---------------------------------------------------------------

def _offsets(r: TiltedRect | np.ndarray) -> np.ndarray:
    offs = enumerate_points(r).points if isinstance(r, TiltedRect) else np.asarray(r)
    if len(offs) == 0:
        raise ValueError("rectangle contains no lattice point")
    return offs


def ergodic_average(sys: TorusSystem, f: ObservedFunction, r: TiltedRect | np.ndarray, x0: float) -> float:
    """Mean of ``f(x0 + i alpha + j beta mod 1)`` over ``(i, j)`` in ``r ∩ Z^2``.

    The sum is exactly rounded, so it does not depend on the order of the
    terms; it is taken about the smallest value so a constant averages to itself.
    """
    offs = _offsets(r)
    v = f(sys.orbit(x0, offs[:, 0], offs[:, 1]))
    v0 = float(v.min())
    return v0 + math.fsum(v - v0) / len(v)


def ergodic_averages(sys: TorusSystem, f: Callable[[np.ndarray], np.ndarray], r: TiltedRect | np.ndarray,
                     starts: np.ndarray) -> np.ndarray:
    """``M_R f`` at many starting points; terms are added in row-major offset order."""
    offs = _offsets(r)
    starts = np.asarray(starts, dtype=float).ravel()
    shift = offs[:, 0] * sys.alpha + offs[:, 1] * sys.beta
    out = np.empty(len(starts))
    chunk = max(1, 2_000_000 // len(offs))
    for a in range(0, len(starts), chunk):
        x = np.mod(starts[a:a + chunk, None] + shift[None, :], 1.0)
        vals = f(x)
        acc = np.zeros(len(x))
        for c in range(vals.shape[1]):
            acc += vals[:, c]
        out[a:a + chunk] = acc / len(offs)
    return out


def convergence_errors(sys: TorusSystem, f: ObservedFunction, rects: Sequence[TiltedRect], x0: float) -> list[float]:
    """``|M_R f(x0) - ∫f|`` along a sequence of rectangles."""
    return [abs(ergodic_average(sys, f, r, x0) - f.exact_integral) for r in rects]


# --- coboundaries -------------------------------------------------------------

def symmetric_difference_count(r: TiltedRect) -> int:
    """``#((R ∩ Z^2) Δ (R + (0, 1)) ∩ Z^2)``"""
    pts = enumerate_points(r).points
    if len(pts) == 0:
        return 0
    a = {(int(x), int(y)) for x, y in pts}
    b = {(x, y + 1) for x, y in a}
    return len(a ^ b)


def coboundary_envelope(r: TiltedRect, sup_g: float) -> float:
    """``4 (l + L) / (l L) * sup|g|``"""
    l, L = r.short_side, r.long_side
    return 4 * (l + L) / (l * L) * sup_g


def coboundary_decay(sys: TorusSystem, g: ObservedFunction, r: TiltedRect, x0: float = 0.0) -> tuple[float, float]:
    """``(bound, measured)`` for ``f = g - g∘T`` averaged over ``r`` from ``x0``.

    ``measured = |M_R f(x0)|`` and ``bound = #Δ_R / #R * sup|g|`` where
    ``Δ_R`` is the symmetric difference of ``R`` and ``R + (0, 1)`` on Z^2.
    """
    n = len(_offsets(r))
    f = coboundary(g, sys)
    measured = abs(ergodic_average(sys, f, r, x0))
    bound = symmetric_difference_count(r) / n * g.sup_abs
    return bound, measured


# --- transfer -----------------------------------------------------------------

class WindowError(ValueError):
    def __init__(self, k: int, l: int, n: int, m: int, K: int):
        super().__init__(f"point (k, l) = ({k}, {l}) with rectangle n = {n} (offsets up to {m}) "
                         f"leaves the window |k|, |l| <= {K}")
        self.k, self.l, self.n = k, l, n


def orbit_grid(sys: TorusSystem, f: ObservedFunction, K: int, x0: float) -> GridFunction:
    """``phi(k, l) = f(S^k T^l x0)`` for ``|k|, |l| <= K``, zero elsewhere."""
    window = Box(-K, K, -K, K)
    ks = np.arange(-K, K + 1)
    kk, ll = np.meshgrid(ks, ks)
    return GridFunction(window, f(sys.orbit(x0, kk, ll)))


def transfer_check(sys: TorusSystem, f: ObservedFunction, fam: RectFamily, K: int, x0: float,
                   points: Sequence[tuple[int, int]] | None = None) -> float:
    """Largest ``|A_n |phi_x0|(k, l) - M_n |f|(S^k T^l x0)|`` over the family.

    ``points`` defaults to every ``(k, l)`` with ``|k|, |l| <= K - m``, ``m``
    the largest offset coordinate in the family. A point whose rectangle
    leaves the sampling window raises :class:`WindowError`.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    ms = [int(np.abs(o).max()) for o in fam.offsets]
    m = max(ms)
    if points is None:
        if m > K:
            raise WindowError(K, K, int(np.argmax(ms)), m, K)
        ev = Box(-K + m, K - m, -K + m, K - m)
        ks = np.arange(-K + m, K - m + 1)
        kk, ll = np.meshgrid(ks, ks)
        pts = np.stack([kk.ravel(), ll.ravel()], axis=1)
    else:
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
        for k, l in pts:
            for n, mn in enumerate(ms):
                if max(abs(k), abs(l)) > K - mn:
                    raise WindowError(int(k), int(l), n, mn, K)
        ev = None
    phi = orbit_grid(sys, f, K, x0).abs()
    starts = sys.orbit(x0, pts[:, 0], pts[:, 1])
    worst = 0.0
    for offs in fam.offsets:
        if ev is not None:
            lhs = (rect_sums(phi, offs, ev, method="direct") / len(offs)).ravel()
        else:
            lhs = np.array([average(phi, offs, (int(k), int(l))) for k, l in pts])
        rhs = ergodic_averages(sys, lambda x: np.abs(f(x)), offs, starts)
        worst = max(worst, float(np.max(np.abs(lhs - rhs), initial=0.0)))
    return worst

