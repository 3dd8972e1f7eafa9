"""Direction sets given by an increasing sequence ``u`` with slopes ``1/u_k``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

# Finite truncations are always "lacunary" with some ratio < 1; experiments
# treat a slope set as lacunary only when its witness ratio is at most this.
LACUNARY_THRESHOLD = 0.9


@dataclass(frozen=True)
class DirectionSet:
    """Increasing ``u = (u_0 = 0, u_1, ..., u_N)``; slopes are ``1/u_k`` for k >= 1."""

    u: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        u = tuple(float(v) for v in self.u)
        if len(u) < 2:
            raise ValueError("direction set needs at least one direction")
        if u[0] != 0.0:
            raise ValueError("u_0 must be 0")
        if any(b <= a for a, b in zip(u, u[1:])):
            raise ValueError("u must be strictly increasing")
        if not all(math.isfinite(v) for v in u):
            raise ValueError("u must be finite")
        object.__setattr__(self, "u", u)

    @classmethod
    def from_slopes(cls, slopes: Sequence[float], label: str = "") -> "DirectionSet":
        return cls((0.0, *(1.0 / s for s in slopes)), label)

    def __len__(self) -> int:
        """Number of directions (``u_0`` excluded)."""
        return len(self.u) - 1

    @property
    def slopes(self) -> tuple[float, ...]:
        return tuple(1.0 / v for v in self.u[1:])


@dataclass(frozen=True)
class DirectionDiagnostics:
    perron_factor_truncated: float
    perron_argmax: tuple[int, int]
    condition_i_constant: float
    lacunary_ratio: float | None
    treated_as_lacunary: bool
    max_index: int
    notes: dict = field(default_factory=dict)


def gen_lacunary(lam: float, count: int) -> DirectionSet:
    """Slopes ``lam, lam**2, ..., lam**count``."""
    if not 0 < lam < 1:
        raise ValueError(f"lacunary ratio must lie in (0, 1), got {lam}")
    if count < 1:
        raise ValueError("count must be >= 1")
    return DirectionSet.from_slopes([lam ** k for k in range(1, count + 1)], f"lacunary({lam:g})")


def gen_power(s: float, count: int) -> DirectionSet:
    """``u_k = k**s`` for k = 1..count."""
    if not s > 0:
        raise ValueError("exponent must be positive")
    return DirectionSet((0.0, *(float(k) ** s for k in range(1, count + 1))), f"power({s:g})")


def gen_geometric(base: float, count: int) -> DirectionSet:
    """``u_k = base**k``; slopes are lacunary and the Perron factor is unbounded."""
    if not base > 1:
        raise ValueError("base must exceed 1")
    return DirectionSet((0.0, *(base ** k for k in range(1, count + 1))), f"geometric({base:g})")


def perron_factor_detail(d: DirectionSet, max_index: int) -> tuple[float, tuple[int, int]]:
    """Truncated Perron factor and the ``(n, l)`` achieving it.

    The sup runs over ``1 <= n``, ``1 <= l <= n`` with ``n + 2l <= max_index``.
    """
    if max_index > len(d):
        raise ValueError(f"perron factor up to index {max_index} needs {max_index} directions, have {len(d)}")
    if max_index < 3:
        raise ValueError("max_index must be >= 3")
    u = d.u
    best, arg = -math.inf, (0, 0)
    for n in range(1, max_index + 1):
        for l in range(1, n + 1):
            if n + 2 * l > max_index:
                break
            r = (u[n + 2 * l] - u[n + l]) / (u[n + l] - u[n])
            v = r + 1.0 / r
            if v > best:
                best, arg = v, (n, l)
    return best, arg


def perron_factor(d: DirectionSet, max_index: int) -> float:
    return perron_factor_detail(d, max_index)[0]


def condition_i_constant(d: DirectionSet, max_index: int) -> float:
    """Largest ``c`` with ``1 + u_{k-1}^2 >= c (u_k - u_{k-1})^2`` for k <= max_index."""
    if max_index < 1:
        raise ValueError("max_index must be >= 1")
    if max_index > len(d):
        raise ValueError(f"need {max_index} directions, have {len(d)}")
    u = d.u
    return min((1 + u[k - 1] ** 2) / (u[k] - u[k - 1]) ** 2 for k in range(1, max_index + 1))


def is_lacunary(slopes: Sequence[float], threshold: float = LACUNARY_THRESHOLD) -> tuple[bool, float]:
    """Classify a decreasing positive slope list by its largest consecutive ratio.

    Returns ``(witness <= threshold, witness)``. A single slope is vacuously
    lacunary with witness 0.
    """
    s = [float(v) for v in slopes]
    if not s or any(v <= 0 for v in s):
        raise ValueError("slopes must be positive")
    if any(b >= a for a, b in zip(s, s[1:])):
        raise ValueError("slopes must be strictly decreasing")
    if len(s) == 1:
        return True, 0.0
    witness = max(b / a for a, b in zip(s, s[1:]))
    return witness <= threshold, witness


def diagnostics(d: DirectionSet, max_index: int | None = None) -> DirectionDiagnostics:
    max_index = len(d) if max_index is None else max_index
    pf, arg = perron_factor_detail(d, max_index) if max_index >= 3 else (math.nan, (0, 0))
    lac, witness = is_lacunary(d.slopes[:max_index])
    return DirectionDiagnostics(
        perron_factor_truncated=pf,
        perron_argmax=arg,
        condition_i_constant=condition_i_constant(d, max_index),
        lacunary_ratio=witness,
        treated_as_lacunary=lac,
        max_index=max_index,
        notes={"lacunary_threshold": LACUNARY_THRESHOLD, "lacunarity_read_on": "slopes"},
    )
