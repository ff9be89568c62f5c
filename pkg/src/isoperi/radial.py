"""Weighted volumes and energies of centered and off-center balls."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import DimensionError, OutOfRangeError, QuadratureError, SingularInputError
from .weights import WeightPair, unit_ball_volume

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-13
FD_REL_STEP = 1e-4
FD_REL_TOL = 1e-4


def omega(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return unit_ball_volume(n)


@dataclass(frozen=True)
class EnergyBreakdown:
    perimeter_term: float
    potential_term: float
    total: float

    @classmethod
    def of(cls, perimeter: float, potential: float) -> "EnergyBreakdown":
        return cls(perimeter, potential, perimeter + potential)


@dataclass(frozen=True)
class ProfilePoint:
    r: float
    volume: float
    energy: float
    dE_dv: float
    d2E_dv2: float
    fd_dE_dv: float = math.nan
    fd_d2E_dv2: float = math.nan
    consistent: bool = True


def integrate_radial(func, a: float, b: float, knots=()) -> float:
    """Integrate a scalar function over [a, b], splitting panels at ``knots``."""
    if b <= a:
        return 0.0
    edges = [a, *sorted(k for k in knots if a < k < b), b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(func, lo, hi, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        if not math.isfinite(val) or err > max(1e-9, 1e-9 * abs(val)):
            raise QuadratureError(
                f"quadrature on [{lo:.6g}, {hi:.6g}] did not converge", estimate=val, error=err
            )
        total += val
    return total


def _shell_factor(n: int) -> float:
    return n * omega(n)


def volume_density(pair: WeightPair, t: float) -> float:
    """Phi'(t) = n omega_n t^(n-1) e^psi(t)."""
    return _shell_factor(pair.n) * t ** (pair.n - 1) * math.exp(pair.psi(t))


def weighted_ball_volume(pair: WeightPair, r: float, r0: float = 0.0, v0: float = 0.0) -> float:
    """Phi(r), optionally continued from a known value ``Phi(r0) = v0``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    n = pair.n
    c = _shell_factor(n)
    sign = 1.0
    lo, hi = r0, r
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    part = integrate_radial(
        lambda t: t ** (n - 1) * math.exp(pair.psi(t)), lo, hi, pair.knots
    )
    return v0 + sign * c * part


def inverse_volume(pair: WeightPair, v: float, r_max: float = 1e4) -> float:
    """Psi(v): the radius of the centered ball of weighted volume v."""
    if v < 0:
        raise ValueError("volume must be nonnegative")
    if v == 0:
        return 0.0
    tol = 1e-10 * max(1.0, v)
    # bracket
    lo, vlo = 0.0, 0.0
    hi = min(r_max, (v / omega(pair.n)) ** (1.0 / pair.n) * math.exp(-pair.psi(0.0) / pair.n))
    vhi = weighted_ball_volume(pair, hi)
    while vhi < v:
        if hi >= r_max:
            raise OutOfRangeError(f"volume {v:.6g} exceeds Phi(r_max) = {vhi:.6g}")
        lo, vlo = hi, vhi
        hi = min(r_max, 2 * hi)
        vhi = weighted_ball_volume(pair, hi, lo, vlo)
    # safeguarded Newton, reusing the last evaluated point
    r, vr = (lo, vlo) if v - vlo < vhi - v else (hi, vhi)
    for _ in range(200):
        if abs(vr - v) <= tol:
            return r
        if vr < v:
            lo, vlo = r, vr
        else:
            hi, vhi = r, vr
        dens = volume_density(pair, r) if r > 0 else 0.0
        step = (v - vr) / dens if dens > 0 else math.inf
        cand = r + step
        if not lo < cand < hi:
            cand = 0.5 * (lo + hi)
        vr = weighted_ball_volume(pair, cand, r, vr)
        r = cand
        if hi - lo <= 4e-16 * hi:
            break
    if abs(vr - v) <= tol:
        return r
    raise QuadratureError(f"inverse volume did not converge for v = {v:.6g}", estimate=r)


def potential_integral(pair: WeightPair, r: float, r0: float = 0.0, p0: float = 0.0) -> float:
    """n omega_n int_0^r g t^(n-1) e^psi dt, optionally continued from r0."""
    n = pair.n
    sign = 1.0
    lo, hi = r0, r
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    part = integrate_radial(
        lambda t: pair.g(t) * t ** (n - 1) * math.exp(pair.psi(t)), lo, hi, pair.knots
    )
    return p0 + sign * _shell_factor(n) * part


def ball_perimeter(pair: WeightPair, r: float) -> float:
    return _shell_factor(pair.n) * r ** (pair.n - 1) * math.exp(pair.psi(r))


def ball_energy(pair: WeightPair, r: float) -> EnergyBreakdown:
    if r <= 0:
        raise SingularInputError("ball energy needs r > 0")
    return EnergyBreakdown.of(ball_perimeter(pair, r), potential_integral(pair, r))


def energy_of_volume(pair: WeightPair, v: float) -> float:
    """The ball profile: energy of the centered ball of weighted volume v."""
    return ball_energy(pair, inverse_volume(pair, v)).total


def profile_derivatives(pair: WeightPair, r: float) -> tuple[float, float]:
    """Closed-form first and second derivatives of the ball profile at v = Phi(r)."""
    n = pair.n
    d1 = pair.g(r) + pair.psi(r, 1) + (n - 1) / r
    d2 = (r * r * pair.kappa(r) - n + 1) / (_shell_factor(n) * r ** (n + 1) * math.exp(pair.psi(r)))
    return d1, d2


def _fd_profile_derivatives(pair: WeightPair, r: float, h_rel: float = FD_REL_STEP):
    """Finite differences of the energy in r, converted to v-derivatives by the chain rule."""
    n = pair.n
    h = h_rel * r
    p0 = potential_integral(pair, r)
    e = {}
    for k in (-1, 0, 1):
        rk = r + k * h
        e[k] = ball_perimeter(pair, rk) + potential_integral(pair, rk, r, p0)
    de = (e[1] - e[-1]) / (2 * h)
    d2e = (e[1] - 2 * e[0] + e[-1]) / (h * h)
    phi1 = volume_density(pair, r)
    phi2 = _shell_factor(n) * math.exp(pair.psi(r)) * (
        (n - 1) * r ** (n - 2) + r ** (n - 1) * pair.psi(r, 1)
    )
    return de / phi1, (d2e * phi1 - de * phi2) / phi1**3


def energy_profile_point(pair: WeightPair, r: float, check: bool = True) -> ProfilePoint:
    if r <= 0:
        raise SingularInputError("the energy profile is singular at r = 0")
    if pair.n < 2:
        raise DimensionError("energy profile derivatives need n >= 2")
    n = pair.n
    vol = weighted_ball_volume(pair, r)
    energy = ball_energy(pair, r).total
    d1, d2 = profile_derivatives(pair, r)
    if not check:
        return ProfilePoint(r, vol, energy, d1, d2)
    f1, f2 = _fd_profile_derivatives(pair, r)
    # E'' is a difference of two terms; compare against their combined size
    scale2 = (r * r * abs(pair.kappa(r)) + n - 1) / (
        _shell_factor(n) * r ** (n + 1) * math.exp(pair.psi(r))
    )
    scale1 = abs(pair.g(r)) + abs(pair.psi(r, 1)) + (n - 1) / r
    ok = abs(f1 - d1) <= FD_REL_TOL * scale1 and abs(f2 - d2) <= FD_REL_TOL * scale2
    return ProfilePoint(r, vol, energy, d1, d2, f1, f2, bool(ok))


def profile_sweep(pair: WeightPair, radii) -> list[ProfilePoint]:
    return [energy_profile_point(pair, float(r)) for r in radii]


@dataclass(frozen=True)
class SlopeReport:
    min_slope: float | None
    g0: float
    passed: bool
    pairs_checked: int


def profile_slope_check(pair: WeightPair, v_list) -> SlopeReport:
    """Check that every secant slope of the ball profile is at least g(0)."""
    vols = [float(v) for v in v_list]
    g0 = float(pair.g(0.0))
    if len(vols) < 2:
        return SlopeReport(None, g0, True, 0)
    if any(b <= a for a, b in zip(vols, vols[1:])) or vols[0] <= 0:
        raise ValueError("volumes must be positive and increasing")
    energies = [energy_of_volume(pair, v) for v in vols]
    slopes = [
        (energies[j] - energies[i]) / (vols[j] - vols[i])
        for i in range(len(vols))
        for j in range(i + 1, len(vols))
    ]
    low = min(slopes)
    return SlopeReport(low, g0, low >= g0, len(slopes))


# --- off-center balls -------------------------------------------------------------


@lru_cache(maxsize=16)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _check_dim(n: int):
    if n not in (2, 3):
        raise DimensionError(f"off-center balls are supported for n in {{2, 3}}, got {n}")


def _composite(edges, order: int):
    """Gauss nodes and weights on consecutive panels given by ``edges``."""
    x, w = _gauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * (x + 1) + lo
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


def _phi_edges(knots, d: float, t: float) -> list[float]:
    """Split [0, pi] where the sphere of radius t around d e_1 crosses a knot sphere."""
    edges = [0.0, math.pi]
    if d > 0 and t > 0:
        for k in knots:
            c = (k * k - d * d - t * t) / (2 * d * t)
            if -1 < c < 1:
                edges.append(math.acos(c))
    return sorted(set(edges))


def _solid_integrals(pair: WeightPair, d: float, rho: float, order: int):
    """(volume, potential) of the ball B_rho(d e_1) by tensor Gauss quadrature.

    Panels in t and phi are split where the integrand crosses a knot of the
    weights, so piecewise weights keep the full Gauss accuracy.
    """
    n = pair.n
    knots = pair.knots
    t_edges = {0.0, rho}
    if 0 < d < rho:
        t_edges.add(d)  # |x| has a conical kink at the origin
    for k in knots:
        for e in (abs(k - d), k + d):
            if 0 < e < rho:
                t_edges.add(e)
    t, wt = _composite(sorted(t_edges), order)
    radii, weights = [], []
    for ti, wi in zip(t, wt):
        phi, wphi = _composite(_phi_edges(knots, d, ti), order)
        radii.append(np.sqrt(np.maximum(d * d + ti * ti + 2 * d * ti * np.cos(phi), 0.0)))
        weights.append(wi * wphi * ti ** (n - 1) * np.sin(phi) ** (n - 2))
    radius = np.concatenate(radii)
    W = np.concatenate(weights) * (n - 1) * omega(n - 1)
    dens = np.exp(pair.psi(radius))
    return float(np.sum(W * dens)), float(np.sum(W * dens * pair.g(radius)))


def _boundary_integral(pair: WeightPair, d: float, rho: float, order: int) -> float:
    n = pair.n
    phi, wphi = _composite(_phi_edges(pair.knots, d, rho), order)
    radius = np.sqrt(np.maximum(d * d + rho * rho + 2 * d * rho * np.cos(phi), 0.0))
    jac = rho ** (n - 1) * np.sin(phi) ** (n - 2) * (n - 1) * omega(n - 1)
    return float(np.sum(wphi * jac * np.exp(pair.psi(radius))))


def _shell_cap(n: int, r: float, d: float, rho: float) -> float:
    """Measure of {|x| = r} inside B_rho(d e_1), divided by r^(n-1)."""
    if d == 0:
        return n * omega(n) if r < rho else 0.0
    c = (r * r + d * d - rho * rho) / (2 * r * d)
    alpha = math.acos(min(1.0, max(-1.0, c)))
    if n == 2:
        return 2 * alpha
    return 2 * math.pi * (1 - math.cos(alpha))


def _shell_integral(pair: WeightPair, d: float, rho: float, weight) -> float:
    n = pair.n
    lo, hi = abs(d - rho), d + rho
    total = 0.0
    if rho > d:
        total += _shell_factor(n) * integrate_radial(
            lambda r: weight(r) * r ** (n - 1), 0.0, rho - d, pair.knots
        )
    total += integrate_radial(
        lambda r: weight(r) * r ** (n - 1) * _shell_cap(n, r, d, rho), lo, hi, pair.knots
    )
    return total


def offcenter_ball_volume(
    pair: WeightPair, d: float, rho: float, method: str = "gauss", order: int = 64
) -> float:
    """Weighted volume of the ball of radius rho centered at distance d from 0."""
    _check_dim(pair.n)
    if d < 0 or rho <= 0:
        raise ValueError("need d >= 0 and rho > 0")
    if method == "gauss":
        return _solid_integrals(pair, d, rho, order)[0]
    if method == "shells":
        return _shell_integral(pair, d, rho, lambda r: math.exp(pair.psi(r)))
    raise ValueError(f"unknown method {method!r}")


def offcenter_ball_energy(
    pair: WeightPair, d: float, rho: float, method: str = "gauss", order: int = 64
) -> EnergyBreakdown:
    _check_dim(pair.n)
    if d < 0 or rho <= 0:
        raise ValueError("need d >= 0 and rho > 0")
    if method == "gauss":
        potential = _solid_integrals(pair, d, rho, order)[1]
        perimeter = _boundary_integral(pair, d, rho, order)
    elif method == "shells":
        potential = _shell_integral(pair, d, rho, lambda r: pair.g(r) * math.exp(pair.psi(r)))
        perimeter = _boundary_integral(pair, d, rho, order)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EnergyBreakdown.of(perimeter, potential)


def offcenter_convergence(pair: WeightPair, d: float, rho: float, order: int = 64) -> float:
    """Largest relative change of volume or energy when the Gauss order is doubled."""
    base_v = offcenter_ball_volume(pair, d, rho, order=order)
    fine_v = offcenter_ball_volume(pair, d, rho, order=2 * order)
    base_e = offcenter_ball_energy(pair, d, rho, order=order).total
    fine_e = offcenter_ball_energy(pair, d, rho, order=2 * order).total
    return max(abs(fine_v - base_v) / abs(fine_v), abs(fine_e - base_e) / abs(fine_e))


class BallComparison(NamedTuple):
    volume: float
    centered_radius: float
    centered_energy: float
    offcenter_distance: float
    offcenter_radius: float
    offcenter_energy: float

    @property
    def gap(self) -> float:
        """E(centered) - E(off-center); positive when the off-center ball wins."""
        return self.centered_energy - self.offcenter_energy


def compare_with_offcenter(pair: WeightPair, d: float, rho: float, order: int = 64) -> BallComparison:
    """Compare the ball B_rho(d e_1) with the centered ball of equal weighted volume."""
    v = offcenter_ball_volume(pair, d, rho, order=order)
    r = inverse_volume(pair, v)
    return BallComparison(
        v, r, ball_energy(pair, r).total, d, rho, offcenter_ball_energy(pair, d, rho, order=order).total
    )


def annulus_ball_radius(n: int, v: float, level: float) -> float:
    """Radius of a ball of weighted volume v where psi is constant ``level``."""
    return (math.exp(-level) * v / omega(n)) ** (1 / n)
