"""Sets whose boundary is a radial graph over a sphere, and their stability.

A graph set is E = {R x (1 + u(x)) : x in S^(n-1)} scaled radially, for n = 2
or 3. Functions on the sphere are stored by their values on a product grid and
handled spectrally through a real orthonormal harmonic basis. A harmonic is
labelled (i, j) with degree i and order j in [-i, i]; for n = 2, j = i is
cos(i phi) and j = -i is sin(i phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import sph_harm_y

from .errors import CorrectionError, DimensionError, EmbeddingError, PreconditionError, ResolutionError
from .radial import ball_energy, integrate_radial, omega
from .weights import WeightPair

FUGLEDE_C_FACTOR = 0.4
DEFAULT_EPS = 0.01
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class SphereGrid:
    """Quadrature grid on S^(n-1).

    n = 2: N uniform angles phi with weights 2 pi / N.
    n = 3: Gauss-Legendre in cos(theta) times uniform phi.
    """

    n: int
    theta: np.ndarray = field(repr=False)  # polar angle (pi/2 for n = 2)
    phi: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    shape: tuple[int, ...] = ()

    @classmethod
    def circle(cls, N: int = 128) -> "SphereGrid":
        phi = 2 * np.pi * np.arange(N) / N
        return cls(2, np.full(N, np.pi / 2), phi, np.full(N, 2 * np.pi / N), (N,))

    @classmethod
    def sphere(cls, n_theta: int = 32, n_phi: int | None = None) -> "SphereGrid":
        n_phi = n_phi or 2 * n_theta
        x, w = np.polynomial.legendre.leggauss(n_theta)
        th = np.arccos(x)
        ph = 2 * np.pi * np.arange(n_phi) / n_phi
        T, P = np.meshgrid(th, ph, indexing="ij")
        W = np.outer(w, np.full(n_phi, 2 * np.pi / n_phi))
        return cls(3, T.ravel(), P.ravel(), W.ravel(), (n_theta, n_phi))

    @classmethod
    def for_dimension(cls, n: int, resolution: int = 64) -> "SphereGrid":
        if n == 2:
            return cls.circle(resolution)
        if n == 3:
            return cls.sphere(resolution // 2)
        raise DimensionError("sphere grids exist for n = 2 and n = 3")

    @property
    def max_degree(self) -> int:
        """Largest degree resolved exactly by the quadrature."""
        if self.n == 2:
            return (self.shape[0] - 1) // 2
        n_theta, n_phi = self.shape
        return min(n_theta - 1, (n_phi - 1) // 2)

    def points(self) -> np.ndarray:
        if self.n == 2:
            return np.stack([np.cos(self.phi), np.sin(self.phi)], axis=-1)
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _modes(n: int, L: int):
    for i in range(L + 1):
        if i == 0:
            yield (0, 0)
            continue
        for j in range(-i, i + 1):
            if n == 2 and abs(j) != i:
                continue
            yield (i, j)


def _basis(grid: SphereGrid, i: int, j: int, derivatives: bool = False):
    """Values of Y_ij (and optionally d/dtheta, d/dphi) on the grid."""
    if grid.n == 2:
        ph = grid.phi
        if i == 0:
            y = np.full_like(ph, 1 / math.sqrt(2 * math.pi))
            dphi = np.zeros_like(ph)
        elif j > 0:
            y, dphi = np.cos(i * ph) / math.sqrt(math.pi), -i * np.sin(i * ph) / math.sqrt(math.pi)
        else:
            y, dphi = np.sin(i * ph) / math.sqrt(math.pi), i * np.cos(i * ph) / math.sqrt(math.pi)
        return (y, np.zeros_like(y), dphi) if derivatives else y
    m = abs(j)
    if derivatives:
        yc, dy = sph_harm_y(i, m, grid.theta, grid.phi, diff_n=1)
        dth, dph = dy[..., 0], dy[..., 1]
    else:
        yc = sph_harm_y(i, m, grid.theta, grid.phi)
    if j == 0:
        part = np.real
        scale = 1.0
    else:
        part = np.real if j > 0 else np.imag
        scale = math.sqrt(2) * (-1) ** m
    y = scale * part(yc)
    if not derivatives:
        return y
    return y, scale * part(dth), scale * part(dph)


@lru_cache(maxsize=32)
def _tables(n: int, shape: tuple[int, ...], L: int):
    """Basis values and angular derivatives, one row per mode, for a grid shape."""
    grid = SphereGrid.circle(shape[0]) if n == 2 else SphereGrid.sphere(*shape)
    modes = tuple(_modes(n, L))
    rows = [_basis(grid, i, j, derivatives=True) for i, j in modes]
    Y, Yth, Yph = (np.array([r[k] for r in rows]) for k in range(3))
    for arr in (Y, Yth, Yph):
        arr.setflags(write=False)
    return modes, Y, Yth, Yph


@dataclass(frozen=True)
class HarmonicSpectrum:
    n: int
    L: int
    coefficients: dict

    def eigenvalue(self, i: int) -> int:
        return i * (i + self.n - 2)

    def norm_sq(self) -> float:
        return float(sum(a * a for a in self.coefficients.values()))

    def vector(self) -> np.ndarray:
        return np.array([self.coefficients[m] for m in _modes(self.n, self.L)])

    def synthesize(self, grid: SphereGrid) -> np.ndarray:
        _, Y, _, _ = _tables(grid.n, grid.shape, self.L)
        return self.vector() @ Y

    def rows(self):
        for (i, j), a in sorted(self.coefficients.items()):
            yield i, j, a


def harmonic_decompose(grid: SphereGrid, u, L: int | None = None, check: bool = True) -> HarmonicSpectrum:
    """Project u on the orthonormal harmonics up to degree L.

    With ``check`` the synthesis must reproduce u (band-limited input),
    otherwise a resolution error is raised.
    """
    top = grid.max_degree
    L = top if L is None else L
    if L > top:
        raise ResolutionError(f"degree {L} exceeds the grid resolution {top}")
    u = np.asarray(u, dtype=float)
    modes, Y, _, _ = _tables(grid.n, grid.shape, L)
    a = Y @ (grid.weights * u)
    harm = HarmonicSpectrum(grid.n, L, dict(zip(modes, a.tolist())))
    if check:
        resid = a @ Y - u
        if math.sqrt(grid.integrate(resid**2)) > 1e-9 * max(1.0, math.sqrt(grid.integrate(u * u))):
            raise ResolutionError("u is not resolved by the harmonics up to the requested degree")
    return harm


def tangential_gradient_sq(grid: SphereGrid, harm: HarmonicSpectrum) -> np.ndarray:
    """|grad_tau u|^2 from the spectrum (exact for band-limited u)."""
    _, _, Yth, Yph = _tables(grid.n, grid.shape, harm.L)
    a = harm.vector()
    u_ph = a @ Yph
    if grid.n == 2:
        return u_ph**2
    u_th = a @ Yth
    return u_th**2 + (u_ph / np.sin(grid.theta)) ** 2


@dataclass(frozen=True)
class GraphSet:
    grid: SphereGrid
    R: float
    u: np.ndarray = field(repr=False)
    grad_sq: np.ndarray = field(repr=False)
    spectrum: HarmonicSpectrum = field(repr=False)

    def __post_init__(self):
        if np.max(np.abs(self.u)) >= 1:
            raise EmbeddingError("sup |u| must be below 1")

    @classmethod
    def from_values(cls, grid: SphereGrid, R: float, u) -> "GraphSet":
        u = np.asarray(u, dtype=float)
        if np.max(np.abs(u)) >= 1:
            raise EmbeddingError("sup |u| must be below 1")
        harm = harmonic_decompose(grid, u)
        return cls(grid, float(R), u, tangential_gradient_sq(grid, harm), harm)

    @classmethod
    def from_function(cls, grid: SphereGrid, R: float, func) -> "GraphSet":
        """Build from ``func(points)`` with points of shape (N, n)."""
        return cls.from_values(grid, R, func(grid.points()))

    def shifted(self, c: float) -> "GraphSet":
        coeffs = dict(self.spectrum.coefficients)
        coeffs[(0, 0)] = coeffs.get((0, 0), 0.0) + c * math.sqrt(self.grid.integrate(np.ones_like(self.u)))
        return replace(self, u=self.u + c, spectrum=replace(self.spectrum, coefficients=coeffs))

    def l2_sq(self) -> float:
        return self.grid.integrate(self.u**2)

    def w1inf(self) -> float:
        return float(max(np.max(np.abs(self.u)), np.sqrt(np.max(self.grad_sq))))


def _radial_moment(pair: WeightPair, weight, R: float, rho: np.ndarray) -> np.ndarray:
    """int_0^rho s^(n-1) weight(s) ds per node: adaptive base to R plus Gauss-Legendre R -> rho."""
    n = pair.n
    base = integrate_radial(lambda s: s ** (n - 1) * float(weight(np.array([s]))[0]), 0.0, R, pair.knots)
    half = 0.5 * (rho - R)
    s = R + half[:, None] * (_GL_X + 1)
    inc = half * (np.sum(_GL_W * s ** (n - 1) * weight(s), axis=1))
    crosses = [k for k in pair.knots if np.any((np.minimum(R, rho) < k) & (k < np.maximum(R, rho)))]
    if crosses:
        for idx in np.nonzero([any(min(R, r) < k < max(R, r) for k in crosses) for r in rho])[0]:
            lo, hi = sorted((R, float(rho[idx])))
            val = integrate_radial(lambda t: t ** (n - 1) * float(weight(np.array([t]))[0]), lo, hi, pair.knots)
            inc[idx] = val if rho[idx] > R else -val
    return base + inc


def graph_volume(pair: WeightPair, gs: GraphSet) -> float:
    rho = gs.R * (1 + gs.u)
    return gs.grid.integrate(_radial_moment(pair, lambda s: np.exp(pair.psi(s)), gs.R, rho))


def graph_potential(pair: WeightPair, gs: GraphSet) -> float:
    rho = gs.R * (1 + gs.u)
    return gs.grid.integrate(
        _radial_moment(pair, lambda s: pair.g(s) * np.exp(pair.psi(s)), gs.R, rho)
    )


def graph_perimeter(pair: WeightPair, gs: GraphSet) -> float:
    n = pair.n
    one_u = 1 + gs.u
    dens = one_u ** (n - 1) * np.sqrt(1 + gs.grad_sq / one_u**2) * np.exp(pair.psi(gs.R * one_u))
    return gs.R ** (n - 1) * gs.grid.integrate(dens)


def graph_energy(pair: WeightPair, gs: GraphSet) -> float:
    return graph_perimeter(pair, gs) + graph_potential(pair, gs)


def _check_dim(pair: WeightPair, gs: GraphSet):
    if pair.n != gs.grid.n:
        raise DimensionError("weight pair and grid dimensions differ")


def volume_correct(pair: WeightPair, gs: GraphSet, target_volume: float) -> tuple[GraphSet, float]:
    """Shift u by a constant so that the weighted volume equals ``target_volume``.

    Returns the corrected set and the shift c0.
    """
    _check_dim(pair, gs)
    n = pair.n
    c = 0.0
    for _ in range(60):
        u = gs.u + c
        if np.any(np.abs(u) >= 1):
            raise CorrectionError("constant shift left the graph range |u| < 1")
        rho = gs.R * (1 + u)
        vol = gs.grid.integrate(_radial_moment(pair, lambda s: np.exp(pair.psi(s)), gs.R, rho))
        err = vol - target_volume
        if abs(err) <= 1e-14 * max(1.0, abs(target_volume)):
            break
        dvol = gs.R * gs.grid.integrate(rho ** (n - 1) * np.exp(pair.psi(rho)))
        step = err / dvol
        c -= step
        if abs(step) <= 1e-16:
            break
    if abs(err) > 1e-10 * max(1.0, abs(target_volume)):
        raise CorrectionError("Newton iteration on the constant shift did not converge")
    return gs.shifted(c), c


class StabilityReport(NamedTuple):
    kappa_positive: bool
    drift_nonnegative: bool
    psi_slope_bound: bool
    weaker_condition: bool
    g_positive: bool

    @property
    def passes(self) -> bool:
        return self.kappa_positive and self.drift_nonnegative and (self.psi_slope_bound or self.weaker_condition)


def stability_conditions(pair: WeightPair, R: float) -> StabilityReport:
    n = pair.n
    p1, p2, g, g1 = pair.psi(R, 1), pair.psi(R, 2), pair.g(R), pair.g(R, 1)
    kap = p2 + g1
    denom = R * R * (p1 + g) + (n - 1) * R
    bound = p1 > -(n - 2) * (n - 1) / denom if denom > 0 else n == 2 and p1 > 0
    weaker = (R * R * p1 + R * (n - 1)) * (p1 + g) + R * (n - 1) * p1 + R * R * kap + (n - 1) * (n - 2) > 0
    return StabilityReport(kap > 0, p1 + g >= 0, bool(bound), bool(weaker), g > 0)


def second_variation_Q(pair: WeightPair, R: float, grid: SphereGrid, u) -> float:
    """Q(u, u) for u on the sphere of radius R, from its harmonic spectrum.

    Q = -f(R) int (Lap u + (n-1)/R^2 u) u + f(R) kappa(R) int u^2 over the sphere
    of radius R, where u is sampled at the grid directions.
    """
    n = grid.n
    if pair.n != n:
        raise DimensionError("weight pair and grid dimensions differ")
    harm = harmonic_decompose(grid, u)
    kap = pair.kappa(R)
    total = sum(
        (harm.eigenvalue(i) - (n - 1) + R * R * kap) * a * a for (i, j), a in harm.coefficients.items()
    )
    return math.exp(pair.psi(R)) * R ** (n - 3) * total


def fuglede_constant(pair: WeightPair, R: float) -> float:
    return FUGLEDE_C_FACTOR * min(1.0, R * R * pair.kappa(R))


class FugledeResult(NamedTuple):
    gap: float
    lower_bound: float
    ratio: float


def fuglede_gap(pair: WeightPair, R: float, gs: GraphSet, eps: float = DEFAULT_EPS, c: float | None = None) -> FugledeResult:
    _check_dim(pair, gs)
    if not stability_conditions(pair, R).passes:
        raise PreconditionError(f"stability conditions fail at R = {R}")
    if gs.w1inf() >= eps:
        raise PreconditionError(f"||u||_W1,inf = {gs.w1inf():.3g} is not below {eps}")
    zero = np.zeros_like(gs.u)
    ball = replace(gs, R=R, u=zero, grad_sq=zero)
    vol_ball = graph_volume(pair, ball)
    if abs(graph_volume(pair, gs) - vol_ball) > 1e-9 * max(1.0, vol_ball):
        raise PreconditionError("the graph set is not volume-corrected to the ball")
    gap = graph_energy(pair, gs) - ball_energy(pair, R).total
    if c is None:
        c = fuglede_constant(pair, R)
    norm = gs.l2_sq()
    lower = c * R ** (pair.n - 1) * math.exp(pair.psi(R)) * norm
    ratio = gap / norm if norm > 0 else math.inf
    return FugledeResult(float(gap), float(lower), float(ratio))


def random_bandlimited(grid: SphereGrid, rng, L: int, amplitude: float, skip_constant: bool = True) -> np.ndarray:
    """Random combination of harmonics of degree 1..L (0..L) scaled to sup|u| = amplitude."""
    modes, Y, _, _ = _tables(grid.n, grid.shape, L)
    a = np.array([0.0 if (skip_constant and i == 0) else rng.uniform(-1.0, 1.0) / (1 + i) ** 2 for i, _ in modes])
    u = a @ Y
    peak = np.max(np.abs(u))
    return u * (amplitude / peak) if peak > 0 else u


def unit_sphere_measure(n: int) -> float:
    return n * omega(n)
