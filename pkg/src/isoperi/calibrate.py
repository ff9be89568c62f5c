"""Calibration certificate for large centered balls.

For a kappa-uniform pair the radial field X = ell(r) x / r gives
E(F) >= int_F h f dx with h = ell' + ell (psi' + g + (n-1)/r), with equality
on centered balls of radius >= r*. After rescaling to kappa = 1 the explicit
ell below makes h and h' nonnegative, and a level-set exchange argument then
shows centered balls of radius >= r* = sqrt((n+2)/kappa) are optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InfeasibleMassError, PreconditionError
from .radial import ball_energy, integrate_radial, offcenter_ball_energy, offcenter_ball_volume, omega, weighted_ball_volume
from .weights import WeightPair, classify

CERT_TOL = 1e-10
CERT_SAMPLES = 10_000


def ell(r, n: int, order: int = 0):
    """The calibrating profile and its first two derivatives."""
    r = np.asarray(r, dtype=float)
    s = math.sqrt(n + 2)
    a = 3 / (2 * s)
    inside = r <= s
    if order == 0:
        val = np.where(inside, a * (r - r**3 / (3 * (n + 2))), 1.0)
    elif order == 1:
        val = np.where(inside, a * (1 - r * r / (n + 2)), 0.0)
    elif order == 2:
        val = np.where(inside, -2 * a * r / (n + 2), 0.0)
    else:
        raise ValueError("ell is implemented up to order 2")
    return val if val.ndim else float(val)


def _ell_over_r(r, n: int, order: int = 0):
    """ell(r)/r and its derivative, finite at r = 0."""
    s = math.sqrt(n + 2)
    a = 3 / (2 * s)
    inside = r <= s
    safe = np.where(inside, 1.0, r)
    if order == 0:
        return np.where(inside, a * (1 - r * r / (3 * (n + 2))), 1 / safe)
    return np.where(inside, -2 * a * r / (3 * (n + 2)), -1 / safe**2)


def rescale(pair: WeightPair, kappa: float) -> WeightPair:
    """Dilate by lambda = sqrt(kappa) so that psi'' + g' >= 1 becomes the bound."""
    if not kappa > 0:
        raise PreconditionError("kappa must be positive")
    lam = math.sqrt(kappa)
    if lam == 1:
        return pair
    return WeightPair(pair.psi.scaled(lam, 1.0), pair.g.scaled(lam, 1 / lam), pair.n)


def h_field(pair: WeightPair, grid) -> tuple[np.ndarray, np.ndarray]:
    """h and h' on the grid (any r >= 0; the origin uses the analytic limit)."""
    r = np.asarray(grid, dtype=float)
    n = pair.n
    drift = pair.psi(r, 1) + pair.g(r)
    h = ell(r, n, 1) + ell(r, n) * drift + (n - 1) * _ell_over_r(r, n)
    hp = ell(r, n, 2) + ell(r, n, 1) * drift + ell(r, n) * pair.kappa(r) + (n - 1) * _ell_over_r(r, n, 1)
    return h, hp


def r_star(n: int, kappa: float) -> float:
    return math.sqrt((n + 2) / kappa)


@dataclass(frozen=True)
class CalibrationReport:
    kappa: float
    r_star: float
    h_min: float
    hprime_min: float
    samples: int

    @property
    def certified(self) -> bool:
        return self.h_min >= -CERT_TOL and self.hprime_min >= -CERT_TOL


def certify(pair: WeightPair, kappa: float | None = None, samples: int = CERT_SAMPLES) -> CalibrationReport:
    """Sample h, h' for the rescaled pair on [1e-6, 4 sqrt(n+2)] plus both sides of every knot."""
    if kappa is None:
        kappa = classify(pair).kappa_uniform
        if kappa is None:
            raise PreconditionError("the pair is not kappa-uniformly admissible")
    scaled = rescale(pair, kappa)
    top = 4 * math.sqrt(pair.n + 2)
    grid = np.linspace(1e-6, top, samples)
    kn = np.array([k for k in scaled.knots if 1e-6 < k < top])
    if kn.size:
        grid = np.unique(np.concatenate([grid, kn * (1 - 1e-12), kn * (1 + 1e-12)]))
    h, hp = h_field(scaled, grid)
    return CalibrationReport(kappa, r_star(pair.n, kappa), float(h.min()), float(hp.min()), grid.size)


def calibrated_lower_bound(pair: WeightPair, r: float) -> float:
    """int over B_r of h f dx; equals the ball energy once r >= r* (kappa = 1 frame)."""
    n = pair.n
    c = n * omega(n)
    return c * integrate_radial(
        lambda s: s ** (n - 1) * float(h_field(pair, [s])[0][0]) * math.exp(pair.psi(s)), 0.0, r, pair.knots
    )


@dataclass(frozen=True)
class Competitor:
    d: float
    rho: float
    energy: float


@dataclass(frozen=True)
class LargeVolumeReport:
    calibration: CalibrationReport
    R: float
    covered: bool
    centered_energy: float
    competitors: tuple[Competitor, ...] = field(default=())

    @property
    def centered_wins(self) -> bool | None:
        if not self.covered:
            return None
        tol = 1e-9 * max(1.0, abs(self.centered_energy))
        return all(self.centered_energy <= c.energy + tol for c in self.competitors)


def equal_volume_radius(pair: WeightPair, d: float, volume: float, guess: float) -> float:
    """Radius of the ball centered at distance d with the given weighted volume."""

    def resid(rho):
        return offcenter_ball_volume(pair, d, rho) - volume

    lo, hi = 0.5 * guess, guess
    while resid(lo) > 0:
        lo *= 0.5
    while resid(hi) < 0:
        hi *= 1.5
    return brentq(resid, lo, hi, xtol=1e-13, rtol=1e-13)


def large_volume_check(pair: WeightPair, R: float, d_grid=None, kappa: float | None = None) -> LargeVolumeReport:
    cal = certify(pair, kappa)
    if not cal.certified:
        raise PreconditionError(
            f"calibration fails: min h = {cal.h_min:.3g}, min h' = {cal.hprime_min:.3g}"
        )
    centered = ball_energy(pair, R).total
    covered = R >= cal.r_star
    if not covered:
        return LargeVolumeReport(cal, R, False, centered)
    if d_grid is None:
        d_grid = np.linspace(0.1, R, 10)
    vol = weighted_ball_volume(pair, R)
    comps = []
    for d in d_grid:
        rho = equal_volume_radius(pair, float(d), vol, R)
        comps.append(Competitor(float(d), rho, offcenter_ball_energy(pair, float(d), rho).total))
    return LargeVolumeReport(cal, R, True, centered, tuple(comps))


def levelset_check(h_values, mu_weights, subset_mask, tol: float = 1e-12) -> bool:
    """Exchange inequality: a set beats no sublevel set of h with the same mass.

    Returns whether sum_A h mu >= sum_{C_t} h mu where C_t = {h <= t} has
    mu(C_t) = mu(A).
    """
    h = np.asarray(h_values, dtype=float)
    mu = np.asarray(mu_weights, dtype=float)
    mask = np.asarray(subset_mask, dtype=bool)
    mass = float(mu[mask].sum())
    order = np.argsort(h, kind="stable")
    hs, ms = h[order], mu[order]
    # C_t includes every cell tied at level t, so only level ends are candidates
    ends = np.r_[np.nonzero(np.diff(hs))[0], hs.size - 1]
    cum = np.r_[0.0, np.cumsum(ms)[ends]]
    scale = max(1.0, float(mu.sum()))
    hit = np.nonzero(np.abs(cum - mass) <= tol * scale)[0]
    if hit.size == 0:
        raise InfeasibleMassError(f"no sublevel set of h has mass {mass:.17g}")
    k = int(hit[0])
    stop = ends[k - 1] + 1 if k else 0
    sub = float(np.dot(hs[:stop], ms[:stop]))
    lhs = float(np.dot(h[mask], mu[mask]))
    return lhs >= sub - tol * max(1.0, abs(sub))
