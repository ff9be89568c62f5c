import math

import numpy as np
import pytest

from isoperi import calibrate as cal
from isoperi.errors import InfeasibleMassError, PreconditionError
from isoperi.radial import ball_energy
from isoperi.weights import WeightPair, gaussian, make_counterexample_g_monotone, polynomial, zero

GAUSS2 = WeightPair(gaussian(), zero(), 2)


@pytest.mark.parametrize("n", [2, 3])
def test_ell_profile(n):
    s = math.sqrt(n + 2)
    assert cal.ell(s, n) == pytest.approx(1.0, rel=1e-15)
    assert cal.ell(s, n, 1) == pytest.approx(0.0, abs=1e-15)
    assert cal.ell(0.0, n) == 0.0
    r = np.linspace(0, 3 * s, 500)
    v = cal.ell(r, n)
    assert v.min() >= 0 and v.max() <= 1 + 1e-15
    assert np.all(np.diff(v) >= -1e-15)
    # derivatives agree with finite differences away from the junction
    for x in (0.3, 1.1, 0.9 * s):
        h = 1e-6
        assert cal.ell(x, n, 1) == pytest.approx((cal.ell(x + h, n) - cal.ell(x - h, n)) / (2 * h), rel=1e-7)


def test_h_limit_at_origin():
    h, _ = cal.h_field(GAUSS2, [0.0, 1e-9])
    expected = 3 / (2 * math.sqrt(4)) * (1 + 1)  # ell'(0) + (n - 1) ell(r)/r
    assert h == pytest.approx([expected, expected], rel=1e-8)


def test_h_prime_matches_finite_differences():
    pair = WeightPair(gaussian(), polynomial(0.3, 0.2), 3)
    r = np.array([0.4, 1.3, 2.0, 3.5])
    _, hp = cal.h_field(pair, r)
    eps = 1e-6
    fd = (cal.h_field(pair, r + eps)[0] - cal.h_field(pair, r - eps)[0]) / (2 * eps)
    assert np.allclose(hp, fd, rtol=1e-6, atol=1e-8)


def test_outer_region_formula():
    pair = WeightPair(zero(), polynomial(0, 1.0), 3)
    r = np.array([3.0, 5.0])
    h, hp = cal.h_field(pair, r)
    assert np.allclose(h, r + 2 / r)
    assert np.allclose(hp, 1 - 2 / r**2)
    assert np.all(hp >= 1 - 2 / 5)


def test_rescale():
    pair = WeightPair(gaussian(2.0), zero(), 2)  # kappa = 4
    scaled = cal.rescale(pair, 4.0)
    assert scaled.kappa(0.7) == pytest.approx(1.0)
    assert cal.rescale(GAUSS2, 1.0) is GAUSS2
    assert cal.r_star(2, 4.0) == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        cal.rescale(GAUSS2, 0.0)


@pytest.mark.parametrize(
    "pair", [GAUSS2, WeightPair(zero(), polynomial(0, 1.0), 3), WeightPair(gaussian(2.0), polynomial(0.5), 2)]
)
def test_certified(pair):
    rep = cal.certify(pair)
    assert rep.certified
    assert rep.h_min >= -1e-10 and rep.hprime_min >= -1e-10


def test_certify_requires_uniform_kappa():
    with pytest.raises(PreconditionError):
        cal.certify(WeightPair(zero(), zero(), 2))


def test_calibration_equality_on_large_balls():
    for r in (2.0, 2.5, 3.0):
        assert cal.calibrated_lower_bound(GAUSS2, r) == pytest.approx(ball_energy(GAUSS2, r).total, rel=1e-8)
    # below r* the field only gives a lower bound
    assert cal.calibrated_lower_bound(GAUSS2, 1.0) < ball_energy(GAUSS2, 1.0).total


def test_large_volume_gaussian():
    rep = cal.large_volume_check(GAUSS2, 2.0)
    assert rep.covered and rep.centered_wins
    assert len(rep.competitors) == 10
    for c in rep.competitors:
        assert c.energy >= rep.centered_energy


def test_not_covered_below_r_star():
    rep = cal.large_volume_check(GAUSS2, 1.0)
    assert not rep.covered and rep.centered_wins is None


@pytest.mark.slow
def test_counterexample_large_volume():
    pair = make_counterexample_g_monotone()
    rep = cal.large_volume_check(pair, 1.01 * cal.r_star(2, 1e-3), d_grid=[5.0, 30.0, 60.0])
    assert rep.calibration.certified and rep.centered_wins


def test_levelset_equality_and_exchange():
    h = np.array([0.1, 0.2, 0.5, 0.9, 1.3])
    mu = np.ones(5)
    assert cal.levelset_check(h, mu, [True, True, False, False, False])
    # swapping the lowest cell for a higher one is strictly worse
    swap = [False, True, False, True, False]
    assert cal.levelset_check(h, mu, swap)
    assert h[1] + h[3] > h[0] + h[1]
    with pytest.raises(InfeasibleMassError):
        cal.levelset_check(h, np.array([1, 1, 1, 1, 1.5]), [False, False, False, False, True])


def test_levelset_random_masks():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        h = rng.normal(size=12)
        mu = np.ones(12)
        mask = rng.random(12) < 0.5
        assert cal.levelset_check(h, mu, mask)
