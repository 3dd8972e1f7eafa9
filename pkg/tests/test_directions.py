import math

import numpy as np
import pytest

from perron_lab.directions import (
    DirectionSet,
    condition_i_constant,
    diagnostics,
    gen_geometric,
    gen_lacunary,
    gen_power,
    is_lacunary,
    perron_factor,
    perron_factor_detail,
)


def pf_oracle(u, m):
    best = -math.inf
    for l in range(1, m):
        for n in range(l, m):
            if n + 2 * l <= m:
                a = (u[n + 2 * l] - u[n + l]) / (u[n + l] - u[n])
                best = max(best, a + 1 / a)
    return best


def test_lacunary_examples():
    assert gen_lacunary(0.5, 4).slopes == pytest.approx((0.5, 0.25, 0.125, 0.0625))
    assert gen_lacunary(1 / 3, 1).slopes == pytest.approx((1 / 3,))


def test_lacunary_generator_is_lacunary_with_its_ratio():
    rng = np.random.default_rng(0)
    for _ in range(50):
        lam = float(rng.uniform(0.05, 0.9))
        n = int(rng.integers(2, 40))
        ok, w = is_lacunary(gen_lacunary(lam, n).slopes)
        assert ok
        assert w == pytest.approx(lam, rel=1e-9)


def test_power_examples():
    d = gen_power(1, 4)
    assert d.u == (0, 1, 2, 3, 4)
    assert d.slopes == pytest.approx((1, 1 / 2, 1 / 3, 1 / 4))
    assert gen_power(2, 3).u == (0, 1, 4, 9)
    assert diagnostics(gen_power(1, 64)).perron_factor_truncated == pytest.approx(2.0)


def test_perron_factor_examples():
    assert perron_factor(gen_power(1, 64), 64) == pytest.approx(2.0)
    assert perron_factor(gen_power(2, 64), 64) == pytest.approx(34 / 15)
    d = gen_geometric(2, 64)
    vals = [perron_factor(d, m) for m in (8, 16, 32, 64)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("d", [gen_power(1.5, 40), gen_power(0.5, 40), gen_geometric(1.3, 40)])
def test_perron_factor_matches_oracle(d):
    assert perron_factor(d, 40) == pytest.approx(pf_oracle(d.u, 40), rel=1e-12)


def test_perron_factor_argmax_for_squares():
    pf, (n, l) = perron_factor_detail(gen_power(2, 64), 64)
    assert pf == pytest.approx(5 / 3 + 3 / 5)
    assert n == l


def test_perron_factor_preconditions():
    with pytest.raises(ValueError):
        perron_factor(gen_power(1, 4), 5)
    with pytest.raises(ValueError):
        perron_factor(gen_power(1, 4), 2)


def test_condition_i_examples():
    assert condition_i_constant(gen_power(1, 20), 20) == pytest.approx(1.0)
    oracle = min((1 + (k - 1) ** 4) / (2 * k - 1) ** 2 for k in range(1, 17))
    assert condition_i_constant(gen_power(2, 16), 16) == pytest.approx(oracle)
    assert condition_i_constant(DirectionSet((0, 10)), 1) == pytest.approx(0.01)


def test_is_lacunary_examples():
    assert is_lacunary([2.0 ** -k for k in range(1, 20)]) == (True, pytest.approx(0.5))
    ok, w = is_lacunary([1 / k for k in range(1, 21)])
    assert not ok
    assert w == pytest.approx(19 / 20)
    assert is_lacunary([0.3]) == (True, 0.0)
    with pytest.raises(ValueError):
        is_lacunary([0.1, 0.2])


@pytest.mark.parametrize("u", [(1, 2), (0, 2, 1), (0, float("inf")), (0,)])
def test_direction_set_validation(u):
    with pytest.raises(ValueError):
        DirectionSet(u)


def test_from_slopes_round_trip():
    d = DirectionSet.from_slopes([1, 0.5, 0.25])
    assert d.u == (0, 1, 2, 4)
    assert len(d) == 3


def test_diagnostics_fields():
    diag = diagnostics(gen_lacunary(0.5, 10))
    assert diag.treated_as_lacunary
    assert diag.lacunary_ratio == pytest.approx(0.5)
    assert diag.max_index == 10
    assert not diagnostics(gen_power(1, 30)).treated_as_lacunary
