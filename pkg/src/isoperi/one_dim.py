"""The one-dimensional problem: intervals, the F/H/K transforms and a brute-force oracle.

On the line the density is f(|x|) = exp(psi(|x|)) and an interval (a, b) costs
f(|a|) + f(|b|) + int_a^b g(|x|) f(|x|) dx. With F(x) = int_0^x f, H = F^-1 and
K(x) = int_0^x kappa = psi'(x) + g(x) - g(0), the energy of an interval of
weighted length v starting at a >= 0 is

    2 f(a) + int_{F(a)}^{F(a)+v} K(H(w)) dw + g(0) v.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize, minimize_scalar

from .errors import DimensionError, DomainError, OutOfRangeError, PreconditionError
from .radial import EnergyBreakdown, integrate_radial
from .weights import WeightPair

TABLE_NODES = 4096
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _panel_integrals(func, edges: np.ndarray) -> np.ndarray:
    """Gauss-Legendre integral of a vectorized ``func`` over each panel."""
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (hi - lo) * (_GL_NODES + 1) + lo
    return (0.5 * (hi - lo) * _GL_WEIGHTS * func(x)).sum(axis=1)


@dataclass(frozen=True)
class OneDimTables:
    """Interpolation tables for F, G = int g f, H = F^-1 and the closed form K.

    Both interpolants are cubic Hermite with exact slopes on Chebyshev-like
    nodes refined at the weight knots; their error is far below 1e-9 for the
    smooth weights used here.
    """

    pair: WeightPair
    x_max: float
    nodes: np.ndarray = field(repr=False)
    F_nodes: np.ndarray = field(repr=False)
    G_nodes: np.ndarray = field(repr=False)
    _F: CubicHermiteSpline = field(repr=False)
    _G: CubicHermiteSpline = field(repr=False)
    _H: CubicHermiteSpline = field(repr=False)

    @property
    def F_max(self) -> float:
        return float(self.F_nodes[-1])

    def f(self, x):
        return np.exp(self.pair.psi(np.abs(x)))

    def F(self, x):
        """Cumulative weighted length from 0, odd in x."""
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > self.x_max * (1 + 1e-12)):
            raise OutOfRangeError("argument beyond the table range")
        out = np.sign(x) * self._F(np.abs(x))
        return float(out) if out.ndim == 0 else out

    def G(self, x):
        """Odd extension of int_0^x g f."""
        x = np.asarray(x, dtype=float)
        out = np.sign(x) * self._G(np.minimum(np.abs(x), self.x_max))
        return float(out) if out.ndim == 0 else out

    def H(self, w):
        """Inverse of F (odd)."""
        w = np.asarray(w, dtype=float)
        if np.any(np.abs(w) > self.F_max * (1 + 1e-12)):
            raise OutOfRangeError(f"weighted length beyond table range {self.F_max:.6g}")
        out = np.sign(w) * self._H(np.minimum(np.abs(w), self.F_max))
        return float(out) if out.ndim == 0 else out

    def K(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        out = self.pair.psi(x, 1) + self.pair.g(x) - self.pair.g(0.0)
        return float(out) if np.ndim(out) == 0 else out


def build_tables(pair: WeightPair, x_max: float, nodes: int = TABLE_NODES) -> OneDimTables:
    if pair.n != 1:
        raise DimensionError("one-dimensional tables need n = 1")
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    cheb = 0.5 * x_max * (1 - np.cos(np.linspace(0.0, math.pi, nodes)))
    x = np.unique(np.concatenate([cheb, [k for k in pair.knots if k < x_max]]))
    f = np.exp(pair.psi(x))
    gf = pair.g(x) * f
    F = np.concatenate([[0.0], np.cumsum(_panel_integrals(lambda t: np.exp(pair.psi(t)), x))])
    G = np.concatenate(
        [[0.0], np.cumsum(_panel_integrals(lambda t: pair.g(t) * np.exp(pair.psi(t)), x))]
    )
    return OneDimTables(
        pair,
        float(x_max),
        x,
        F,
        G,
        CubicHermiteSpline(x, F, f),
        CubicHermiteSpline(x, G, gf),
        CubicHermiteSpline(F, x, 1.0 / f),
    )


def tables_for_length(pair: WeightPair, length: float, x_min: float = 1.0) -> OneDimTables:
    """Tables whose range covers weighted length ``length`` on each side of 0."""
    x_max = max(x_min, 1.0)
    while True:
        tab = build_tables(pair, x_max)
        if tab.F_max >= length:
            return tab
        if x_max > 1e4:
            raise OutOfRangeError(f"weighted length {length:.6g} not reached below x = 1e4")
        x_max *= 2


@dataclass(frozen=True)
class IntervalUnion:
    intervals: tuple[tuple[float, float], ...]
    weighted_volume: float

    @classmethod
    def build(cls, intervals, tables: OneDimTables) -> "IntervalUnion":
        """Sort, merge intervals touching within 1e-12 and cache the weighted volume."""
        merged: list[list[float]] = []
        for a, b in sorted((float(a), float(b)) for a, b in intervals):
            if not a < b:
                raise ValueError(f"empty interval ({a}, {b})")
            if merged and a <= merged[-1][1] + 1e-12:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        vol = sum(tables.F(b) - tables.F(a) for a, b in merged)
        return cls(tuple((a, b) for a, b in merged), float(vol))


def interval_energy(pair: WeightPair, a: float, b: float) -> EnergyBreakdown:
    """Energy of (a, b) by direct quadrature of the even extension."""
    if not a < b:
        raise ValueError("need a < b")

    def prim(x):
        sign = 1.0 if x >= 0 else -1.0
        return sign * integrate_radial(
            lambda t: pair.g(t) * math.exp(pair.psi(t)), 0.0, abs(x), pair.knots
        )

    perimeter = math.exp(pair.psi(abs(a))) + math.exp(pair.psi(abs(b)))
    return EnergyBreakdown.of(perimeter, prim(b) - prim(a))


def union_energy(tables: OneDimTables, union: IntervalUnion) -> float:
    total = 0.0
    for a, b in union.intervals:
        total += float(tables.f(a) + tables.f(b) + tables.G(b) - tables.G(a))
    return total


def _integral_KH(tables: OneDimTables, w0: float, w1: float, panels: int = 16) -> float:
    """int_{w0}^{w1} K(H(w)) dw by composite Gauss-Legendre in w."""
    if w1 <= w0:
        return 0.0
    edges = np.linspace(w0, w1, panels + 1)
    kinks = tables.F(np.array([k for k in tables.pair.knots if k < tables.x_max]))
    edges = np.unique(np.concatenate([edges, np.atleast_1d(kinks)[(kinks > w0) & (kinks < w1)]]))
    return float(_panel_integrals(lambda w: tables.K(tables.H(w)), edges).sum())


def interval_energy_via_K(tables: OneDimTables, pair: WeightPair, a: float, v: float) -> float:
    if a < 0 or v <= 0:
        raise ValueError("need a >= 0 and v > 0")
    w0 = tables.F(a)
    if w0 + v > tables.F_max:
        raise OutOfRangeError("volume exceeds the table range")
    return 2 * math.exp(pair.psi(a)) + _integral_KH(tables, w0, w0 + v) + pair.g(0.0) * v


def centered_interval(tables: OneDimTables, v: float) -> IntervalUnion:
    c = tables.H(v / 2)
    return IntervalUnion.build([(-c, c)], tables)


def lambda_interval(tables: OneDimTables, v: float, lam: float) -> IntervalUnion:
    """The interval [-H(lam v), H((1 - lam) v)] containing the origin."""
    if not 0 <= lam <= 1:
        raise DomainError("lambda must lie in [0, 1]")
    return IntervalUnion.build([(-tables.H(lam * v), tables.H((1 - lam) * v))], tables)


def lambda_energy(tables: OneDimTables, pair: WeightPair, v: float, lam: float) -> float:
    if not 0 <= lam <= 1:
        raise DomainError("lambda must lie in [0, 1]")
    if v > tables.F_max:
        raise OutOfRangeError("volume exceeds the table range")
    left = _integral_KH(tables, 0.0, lam * v)
    right = _integral_KH(tables, 0.0, (1 - lam) * v)
    return 2 * math.exp(pair.psi(0.0)) + left + right + pair.g(0.0) * v


# --- brute force oracle ----------------------------------------------------------


def _search_grid(tables: OneDimTables, lo: float, hi: float, points: int) -> np.ndarray:
    grid = np.linspace(lo, hi, points)
    knots = [k for k in tables.pair.knots if lo < k < hi] + [-k for k in tables.pair.knots if lo < -k < hi]
    return np.unique(np.concatenate([grid, knots, [0.0] if lo < 0 < hi else []]))


class _Evaluator:
    """Vectorized energies of unions parametrized by left endpoints and volume shares."""

    def __init__(self, tables: OneDimTables, v: float):
        self.t = tables
        self.v = v

    def energy(self, lefts: np.ndarray, shares: np.ndarray) -> np.ndarray:
        """lefts, shares: (..., m). Infeasible (overlapping / out of range) -> inf."""
        t = self.t
        start = t.F(np.clip(lefts, -t.x_max, t.x_max))
        end = start + shares * self.v
        ok = (np.abs(lefts) <= t.x_max) & (end <= t.F_max) & (shares > 0)
        b = t.H(np.clip(end, -t.F_max, t.F_max))
        e = t.f(lefts) + t.f(b) + t.G(b) - t.G(lefts)
        if lefts.shape[-1] > 1:
            # consecutive intervals must be separated
            ok &= np.all(lefts[..., 1:] > b[..., :-1] + 1e-12, axis=-1, keepdims=True)
        e = np.where(ok, e, np.inf)
        return e.sum(axis=-1)


def brute_force_min(
    pair: WeightPair, v: float, max_intervals: int = 1, grid_points: int = 200, x_max: float | None = None
) -> tuple[IntervalUnion, float]:
    """Grid search over unions of up to ``max_intervals`` intervals, then local polish.

    The result is an upper bound for the true minimum; ties favor the
    smaller leftmost endpoint.
    """
    if not 1 <= max_intervals <= 3:
        raise ValueError("max_intervals must be 1, 2 or 3")
    if not 2 <= grid_points <= 200:
        raise ValueError("grid_points must lie in [2, 200]")
    if v <= 0:
        raise ValueError("volume must be positive")
    if x_max is None:
        tables = tables_for_length(pair, 1.5 * v, x_min=4.0)
    else:
        tables = build_tables(pair, x_max)
        if tables.F_max < v:
            raise OutOfRangeError("volume exceeds the weighted length of [0, x_max]")
    ev = _Evaluator(tables, v)
    lim = tables.x_max
    best_e, best_lefts, best_shares = math.inf, None, None

    for m in range(1, max_intervals + 1):
        pts = grid_points if m == 1 else max(8, grid_points // (4 if m == 2 else 10))
        grid = _search_grid(tables, -lim, lim, pts)
        share_grid = np.linspace(0.05, 0.95, 7 if m > 1 else 1) if m > 1 else np.array([1.0])
        for shares in itertools.product(share_grid, repeat=m - 1):
            last = 1.0 - sum(shares)
            if last <= 0:
                continue
            sh = np.array([*shares, last])
            mesh = np.stack(np.meshgrid(*([grid] * m), indexing="ij"), axis=-1).reshape(-1, m)
            mesh = mesh[np.all(np.diff(mesh, axis=1) > 0, axis=1)] if m > 1 else mesh
            if not len(mesh):
                continue
            e = ev.energy(mesh, np.broadcast_to(sh, mesh.shape))
            i = int(np.argmin(e))  # argmin keeps the first (smallest left) on ties
            if e[i] < best_e - 1e-12:
                best_e, best_lefts, best_shares = float(e[i]), mesh[i].copy(), sh

    if best_lefts is None:
        raise OutOfRangeError("no feasible candidate")
    best_lefts, best_shares, best_e = _polish(ev, best_lefts, best_shares, best_e, grid_points)
    intervals = []
    for a, s in zip(best_lefts, best_shares):
        b = tables.H(tables.F(a) + s * v)
        intervals.append((float(a), float(b)))
    return IntervalUnion.build(intervals, tables), float(best_e)


def _polish(ev: _Evaluator, lefts, shares, energy, grid_points):
    m = len(lefts)
    step = 2 * ev.t.x_max / grid_points
    if m == 1:
        res = minimize_scalar(
            lambda a: float(ev.energy(np.array([[a]]), np.array([[1.0]]))[0]),
            bounds=(lefts[0] - 2 * step, lefts[0] + 2 * step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < energy:
            return np.array([res.x]), shares, float(res.fun)
        return lefts, shares, energy

    def obj(p):
        a = p[:m]
        s = np.append(p[m:], 1.0 - p[m:].sum())
        if np.any(s <= 0):
            return math.inf
        return float(ev.energy(a[None, :], s[None, :])[0])

    x0 = np.concatenate([lefts, shares[:-1]])
    res = minimize(obj, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
    if res.fun < energy:
        return res.x[:m], np.append(res.x[m:], 1.0 - res.x[m:].sum()), float(res.fun)
    return lefts, shares, energy


def small_volume_counterexample(pair: WeightPair, x0: float, v_grid) -> float | None:
    """Largest grid volume up to which the interval starting at x0 beats the centered one."""
    if not pair.psi(abs(x0)) < pair.psi(0.0):
        raise PreconditionError("need psi(x0) < psi(0)")
    vols = sorted(float(v) for v in v_grid)
    tables = tables_for_length(pair, 2 * (vols[-1] + 1.0), x_min=abs(x0) + 1.0)
    best = None
    for v in vols:
        centered = interval_energy_via_K(tables, pair, 0.0, v / 2)
        centered = 2 * centered - 2 * math.exp(pair.psi(0.0))
        shifted = interval_energy_via_K(tables, pair, abs(x0), v)
        if shifted < centered:
            best = v
        else:
            break
    return best
