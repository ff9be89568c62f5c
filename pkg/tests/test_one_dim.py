import math

import numpy as np
import pytest

from isoperi import one_dim
from isoperi.errors import DimensionError, DomainError, OutOfRangeError, PreconditionError
from isoperi.weights import WeightPair, gaussian, polynomial, zero

SQUARE = WeightPair(zero(), polynomial(0, 0, 1.0), 1)
FLAT = WeightPair(zero(), zero(), 1)


def dip_pair():
    # psi = cos r - 1 dips below psi(0); g = r keeps psi'' + g' = 1 - cos r >= 0
    return WeightPair(polynomial(-1.0, trig=((1.0, 1.0, 0.0),)), polynomial(0, 1.0), 1)


def test_dip_pair_shape():
    pair = dip_pair()
    assert pair.psi(0.0) == pytest.approx(0.0, abs=1e-15)
    assert pair.psi(math.pi) == pytest.approx(-2.0)
    assert pair.psi(0.0, 1) == pytest.approx(0.0, abs=1e-15)


def test_flat_tables_are_identities():
    t = one_dim.build_tables(FLAT, 5.0)
    x = np.linspace(0, 4.9, 13)
    assert np.allclose(t.F(x), x, atol=1e-12)
    assert np.allclose(t.H(x), x, atol=1e-12)


def test_K_for_quadratic_potential():
    t = one_dim.build_tables(SQUARE, 3.0)
    x = np.linspace(0, 2.9, 11)
    assert np.allclose(t.K(x), x * x, atol=1e-10)


def test_F_oracle():
    pair = WeightPair(gaussian(), zero(), 1)
    t = one_dim.build_tables(pair, 2.0)
    from scipy.integrate import quad

    assert float(t.F(1.0)) == pytest.approx(quad(lambda s: math.exp(s * s / 2), 0, 1)[0], rel=1e-10)
    assert float(t.F(1.0)) == pytest.approx(1.19496, abs=1e-5)


def test_tables_need_one_dimension():
    with pytest.raises(DimensionError):
        one_dim.build_tables(WeightPair(zero(), zero(), 2), 1.0)


@pytest.mark.parametrize("v", [0.3, 1.0, 1.7])
def test_interval_energies(v):
    assert one_dim.interval_energy(SQUARE, 0.0, v).total == pytest.approx(2 + v**3 / 3, rel=1e-12)
    assert one_dim.interval_energy(SQUARE, -v / 2, v / 2).total == pytest.approx(2 + v**3 / 12, rel=1e-12)


def test_energy_via_K():
    t = one_dim.build_tables(SQUARE, 4.0)
    assert one_dim.interval_energy_via_K(t, SQUARE, 0.0, 1.0) == pytest.approx(2 + 1 / 3, rel=1e-9)
    assert one_dim.interval_energy_via_K(t, SQUARE, 1.0, 1.0) == pytest.approx(2 + 7 / 3, rel=1e-9)
    with pytest.raises(OutOfRangeError):
        one_dim.interval_energy_via_K(t, SQUARE, 3.5, 1.0)


def test_via_K_matches_direct_quadrature():
    pair = WeightPair(gaussian(0.7), polynomial(0.3, 0.2), 1)
    t = one_dim.build_tables(pair, 4.0)
    for a in (0.0, 0.4, 1.1):
        v = 0.8
        b = float(t.H(t.F(a) + v))
        assert one_dim.interval_energy_via_K(t, pair, a, v) == pytest.approx(
            one_dim.interval_energy(pair, a, b).total, rel=1e-9
        )


def test_lambda_energy_convex_and_minimal_at_half():
    t = one_dim.build_tables(SQUARE, 4.0)
    lams = np.linspace(0, 1, 21)
    e = np.array([one_dim.lambda_energy(t, SQUARE, 1.0, lam) for lam in lams])
    assert np.all(np.diff(e, 2) >= -1e-10)
    assert lams[np.argmin(e)] == pytest.approx(0.5)
    assert e[10] == pytest.approx(2 + 1 / 12, rel=1e-9)
    assert e[0] == pytest.approx(2 + 1 / 3, rel=1e-9)
    with pytest.raises(DomainError):
        one_dim.lambda_energy(t, SQUARE, 1.0, 1.5)


def test_centered_interval():
    t = one_dim.build_tables(SQUARE, 4.0)
    u = one_dim.centered_interval(t, 1.0)
    assert u.intervals[0] == pytest.approx((-0.5, 0.5), abs=1e-10)
    assert u.weighted_volume == pytest.approx(1.0, rel=1e-12)


def test_brute_force_finds_centered_interval():
    union, e = one_dim.brute_force_min(SQUARE, 1.0, max_intervals=3, grid_points=200)
    assert len(union.intervals) == 1
    assert union.intervals[0] == pytest.approx((-0.5, 0.5), abs=1e-4)
    assert e == pytest.approx(2 + 1 / 12, abs=1e-6)


def test_brute_force_small_volume_limit():
    pair = WeightPair(gaussian(), polynomial(0.5), 1)
    _, e = one_dim.brute_force_min(pair, 1e-4)
    assert e == pytest.approx(2.0, abs=1e-3)


def test_off_center_wins_for_dip():
    pair = dip_pair()
    v = 0.1
    union, e = one_dim.brute_force_min(pair, v, max_intervals=1)
    a, b = union.intervals[0]
    # g = r pulls the optimum inward: 2 sin(x) e^(cos x - 1) = v gives x near pi - 0.38
    x = abs(0.5 * (a + b))
    assert 2 * math.sin(x) * math.exp(math.cos(x) - 1) == pytest.approx(v, rel=0.05)
    centered = one_dim.interval_energy(pair, -v / 2, v / 2).total
    # leading order: 2 (e^(psi(x)) - 1) plus the potential x v
    assert e - centered == pytest.approx(2 * (math.exp(pair.psi(x)) - 1) + x * v, abs=0.05)
    assert e - centered < 2 * (math.exp(-2) - 1) + 0.5


def test_small_volume_counterexample():
    v0 = one_dim.small_volume_counterexample(dip_pair(), math.pi, np.linspace(0.01, 0.5, 10))
    assert v0 is not None and v0 > 0
    with pytest.raises(PreconditionError):
        one_dim.small_volume_counterexample(WeightPair(gaussian(), zero(), 1), 1.0, [0.1])


def test_brute_force_arguments():
    with pytest.raises(ValueError):
        one_dim.brute_force_min(SQUARE, 1.0, max_intervals=4)
    with pytest.raises(OutOfRangeError):
        one_dim.brute_force_min(SQUARE, 50.0, x_max=1.0)
