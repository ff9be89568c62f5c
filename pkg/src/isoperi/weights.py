"""Radial weight profiles psi, g and their admissibility.

A profile is a function of the radius r >= 0 with exact derivatives up to
order 3 (order 2 for clamped cubic splines). A :class:`WeightPair` holds the
log-density ``psi`` (so the density is ``f = exp(psi)``), the potential
``g`` and the ambient dimension ``n``.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.interpolate import CubicSpline
from scipy.special import gamma

from .errors import (
    DomainError,
    InfeasibleConstructionError,
    PositivityError,
    PreconditionError,
    UnsupportedOrderError,
)

KNOT_CONTINUITY_TOL = 1e-12
ADMISSIBLE_TOL = 1e-10


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n (omega_n)."""
    if n == 1:
        return 2.0
    if n == 2:
        return math.pi
    if n == 3:
        return 4.0 * math.pi / 3.0
    return float(math.pi ** (n / 2) / gamma(n / 2 + 1))


def _fmt(x: float) -> str:
    return "%.17g" % x


def _fmt_list(xs) -> str:
    return ", ".join(_fmt(float(x)) for x in xs)


def _parse_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(t) for t in text.replace(",", " ").split())


class WeightProfile:
    """Base class of radial profiles; call as ``profile(r, order)``."""

    kind: ClassVar[str] = ""
    max_derivative_order: ClassVar[int] = 3

    def __call__(self, r, order: int = 0):
        return evaluate(self, r, order)

    def _eval(self, r: np.ndarray, order: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def knots(self) -> tuple[float, ...]:
        """Radii where the profile switches formula (empty if analytic)."""
        return ()

    def scaled(self, arg_scale: float, value_scale: float) -> "WeightProfile":
        """Profile ``s -> value_scale * self(s / arg_scale)``."""
        raise NotImplementedError

    def to_params(self) -> dict[str, str]:
        raise NotImplementedError

    def continuity_defects(self, max_order: int | None = None) -> list[float]:
        """Jumps of derivatives 0..max_order across every knot.

        Each jump is divided by max(1, largest |derivative| of that order on
        the two adjacent intervals), so roundoff in steep pieces does not
        read as a discontinuity.
        """
        if max_order is None:
            max_order = min(self.max_derivative_order, 2)
        knots = [k for k in self.knots if k > 0]
        out = []
        for j, k in enumerate(knots):
            lo = knots[j - 1] if j else 0.0
            hi = knots[j + 1] if j + 1 < len(knots) else 2 * k
            probe = np.concatenate([np.linspace(lo, k, 33), np.linspace(k, hi, 33)])
            for order in range(max_order + 1):
                left, right = self._one_sided(k, order)
                scale = max(1.0, float(np.abs(self._eval(probe, order)).max()))
                out.append(abs(left - right) / scale)
        return out

    def _one_sided(self, r: float, order: int) -> tuple[float, float]:
        h = 1e-13 * max(1.0, r)
        return (
            float(self._eval(np.array([r - h]), order)[0]),
            float(self._eval(np.array([r]), order)[0]),
        )


def evaluate(profile: WeightProfile, r, order: int = 0):
    """Return the ``order``-th derivative of ``profile`` at ``r`` (scalar or array)."""
    if not 0 <= order <= profile.max_derivative_order:
        raise UnsupportedOrderError(
            f"{profile.kind} profile supports derivatives up to order "
            f"{profile.max_derivative_order}, got {order}"
        )
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("profiles are evaluated at r >= 0")
    out = profile._eval(arr.reshape(-1), order)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@dataclass(frozen=True)
class Polynomial(WeightProfile):
    """Sum of c_k r^k plus cosine terms amp * cos(freq * r + phase)."""

    coefficients: tuple[float, ...] = (0.0,)
    trig: tuple[tuple[float, float, float], ...] = ()

    kind: ClassVar[str] = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients) or (0.0,))
        object.__setattr__(self, "trig", tuple(tuple(float(x) for x in t) for t in self.trig))
        for t in self.trig:
            if len(t) != 3:
                raise ValueError("trig terms are (amplitude, frequency, phase)")

    def _eval(self, r, order):
        c = npoly.polyder(np.array(self.coefficients), order) if order else np.array(self.coefficients)
        out = npoly.polyval(r, c) if len(c) else np.zeros_like(r)
        for amp, freq, phase in self.trig:
            out = out + amp * freq**order * np.cos(freq * r + phase + order * math.pi / 2)
        return out

    def scaled(self, arg_scale, value_scale):
        coeffs = tuple(c * value_scale / arg_scale**k for k, c in enumerate(self.coefficients))
        trig = tuple((a * value_scale, w / arg_scale, p) for a, w, p in self.trig)
        return Polynomial(coeffs, trig)

    def to_params(self):
        return {
            "coefficients": _fmt_list(self.coefficients),
            "trig": "; ".join(_fmt_list(t) for t in self.trig),
        }


@dataclass(frozen=True)
class Gaussian(WeightProfile):
    """The quadratic a * r^2 (a Gaussian density when used as psi)."""

    a: float = 0.5

    kind: ClassVar[str] = "gaussian"

    def _eval(self, r, order):
        if order == 0:
            return self.a * r * r
        if order == 1:
            return 2.0 * self.a * r
        if order == 2:
            return np.full_like(r, 2.0 * self.a)
        return np.zeros_like(r)

    def scaled(self, arg_scale, value_scale):
        return Gaussian(self.a * value_scale / arg_scale**2)

    def to_params(self):
        return {"a": _fmt(self.a)}


@dataclass(frozen=True)
class ClampedSpline(WeightProfile):
    """C^2 cubic spline through (knot, value) with clamped end slopes."""

    knot_radii: tuple[float, ...]
    values: tuple[float, ...]
    slope_start: float = 0.0
    slope_end: float = 0.0

    kind: ClassVar[str] = "spline"
    max_derivative_order: ClassVar[int] = 2

    def __post_init__(self):
        object.__setattr__(self, "knot_radii", tuple(float(x) for x in self.knot_radii))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        if len(self.knot_radii) != len(self.values) or len(self.knot_radii) < 2:
            raise ValueError("spline needs at least two (knot, value) pairs")
        if self.knot_radii[0] != 0.0:
            raise ValueError("spline knots must start at r = 0")
        if np.any(np.diff(self.knot_radii) <= 0):
            raise ValueError("spline knots must be strictly increasing")

    @cached_property
    def _spline(self):
        return CubicSpline(
            self.knot_radii,
            self.values,
            bc_type=((1, self.slope_start), (1, self.slope_end)),
            extrapolate=True,
        )

    def _eval(self, r, order):
        return self._spline(r, order)

    @property
    def knots(self):
        return self.knot_radii

    def scaled(self, arg_scale, value_scale):
        return ClampedSpline(
            tuple(k * arg_scale for k in self.knot_radii),
            tuple(v * value_scale for v in self.values),
            self.slope_start * value_scale / arg_scale,
            self.slope_end * value_scale / arg_scale,
        )

    def to_params(self):
        return {
            "knots": _fmt_list(self.knot_radii),
            "values": _fmt_list(self.values),
            "slope_start": _fmt(self.slope_start),
            "slope_end": _fmt(self.slope_end),
        }


def hermite_coefficients(width: float, left, right) -> tuple[float, ...]:
    """Polynomial matching derivatives 0..k-1 at both ends of [0, width].

    ``left`` and ``right`` hold (value, slope, curvature, ...) of equal length
    k; the result has degree 2k - 1 and is returned as ascending coefficients
    in the local variable t = r - r_left. Polynomials of degree < 2k are
    reproduced exactly.
    """
    k = len(left)
    if len(right) != k:
        raise ValueError("both ends need the same number of derivatives")
    w = float(width)
    size = 2 * k
    # solve in x = t / w for conditioning, then rescale
    mat = np.zeros((size, size))
    rhs = np.zeros(size)
    for j in range(k):
        for p in range(j, size):
            falling = math.factorial(p) / math.factorial(p - j)
            if p == j:
                mat[j, p] = falling
            mat[k + j, p] = falling
        rhs[j] = left[j] * w**j
        rhs[k + j] = right[j] * w**j
    a = np.linalg.solve(mat, rhs)
    return tuple(float(a[p] / w**p) for p in range(size))


@dataclass(frozen=True)
class Piecewise(WeightProfile):
    """Piecewise polynomial; piece i is a polynomial in (r - breaks[i]).

    The last piece extends to infinity. Pieces are usually built from quintic
    Hermite blends so that value, slope and curvature match at every break.
    """

    breaks: tuple[float, ...]
    coefficients: tuple[tuple[float, ...], ...]

    kind: ClassVar[str] = "piecewise"

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(
            self, "coefficients", tuple(tuple(float(c) for c in p) for p in self.coefficients)
        )
        if not self.breaks or self.breaks[0] != 0.0:
            raise ValueError("piecewise profile must start at r = 0")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breaks must be strictly increasing")
        if len(self.coefficients) != len(self.breaks):
            raise ValueError("one coefficient list per break is required")

    @classmethod
    def from_hermite(cls, breaks, data, tail=None) -> "Piecewise":
        """Blend (value, slope, curvature) data at each break with quintics.

        ``tail`` gives ascending coefficients of the last (unbounded) piece in
        ``r - breaks[-1]``; by default the quadratic continuation of the data.
        """
        breaks = [float(b) for b in breaks]
        pieces = []
        for i in range(len(breaks) - 1):
            pieces.append(hermite_coefficients(breaks[i + 1] - breaks[i], data[i], data[i + 1]))
        if tail is None:
            v, s, k = data[-1]
            tail = (v, s, 0.5 * k)
        pieces.append(tuple(tail))
        return cls(tuple(breaks), tuple(pieces))

    @cached_property
    def _tables(self):
        deg = max(len(p) for p in self.coefficients)
        base = np.zeros((len(self.coefficients), deg))
        for i, p in enumerate(self.coefficients):
            base[i, : len(p)] = p
        tables = [base]
        for _ in range(3):
            prev = tables[-1]
            der = np.zeros_like(prev)
            der[:, :-1] = prev[:, 1:] * np.arange(1, prev.shape[1])
            tables.append(der)
        return tables, np.array(self.breaks)

    def _eval(self, r, order):
        tables, breaks = self._tables
        idx = np.clip(np.searchsorted(breaks, r, side="right") - 1, 0, len(breaks) - 1)
        return self._eval_pieces(r, order, idx)

    def _eval_pieces(self, r, order, idx):
        tables, breaks = self._tables
        coef = tables[order][idx]
        t = r - breaks[idx]
        out = np.zeros_like(r)
        for k in range(coef.shape[1] - 1, -1, -1):
            out = out * t + coef[:, k]
        return out

    def _one_sided(self, r, order):
        i = self.breaks.index(r)
        rr = np.array([r])
        return (
            float(self._eval_pieces(rr, order, np.array([i - 1]))[0]),
            float(self._eval_pieces(rr, order, np.array([i]))[0]),
        )

    @property
    def knots(self):
        return self.breaks[1:]

    def piece_coefficients(self, i: int, order: int = 0) -> np.ndarray:
        """Ascending local coefficients of the ``order``-th derivative of piece i."""
        tables, _ = self._tables
        return tables[order][i].copy()

    def scaled(self, arg_scale, value_scale):
        return Piecewise(
            tuple(b * arg_scale for b in self.breaks),
            tuple(
                tuple(c * value_scale / arg_scale**k for k, c in enumerate(p))
                for p in self.coefficients
            ),
        )

    def to_params(self):
        return {
            "breaks": _fmt_list(self.breaks),
            "coefficients": "; ".join(_fmt_list(p) for p in self.coefficients),
        }


PROFILE_KINDS = {cls.kind: cls for cls in (Polynomial, Gaussian, ClampedSpline, Piecewise)}


def profile_from_params(params: dict[str, str]) -> WeightProfile:
    kind = params.get("kind", "").strip()
    if kind == "polynomial":
        trig = tuple(_parse_list(t) for t in params.get("trig", "").split(";") if t.strip())
        return Polynomial(_parse_list(params.get("coefficients", "0")), trig)
    if kind == "gaussian":
        return Gaussian(float(params["a"]))
    if kind == "spline":
        return ClampedSpline(
            _parse_list(params["knots"]),
            _parse_list(params["values"]),
            float(params.get("slope_start", "0")),
            float(params.get("slope_end", "0")),
        )
    if kind == "piecewise":
        coeffs = tuple(_parse_list(p) for p in params["coefficients"].split(";"))
        return Piecewise(_parse_list(params["breaks"]), coeffs)
    raise ValueError(f"unknown profile kind {kind!r}")


def zero() -> Polynomial:
    return Polynomial((0.0,))


def constant(c: float) -> Polynomial:
    return Polynomial((c,))


def polynomial(*coefficients: float, trig=()) -> Polynomial:
    return Polynomial(tuple(coefficients), tuple(trig))


def gaussian(a: float = 0.5) -> Gaussian:
    return Gaussian(a)


@dataclass(frozen=True)
class WeightPair:
    """Log-density ``psi`` and potential ``g`` in dimension ``n``."""

    psi: WeightProfile
    g: WeightProfile = field(default_factory=zero)
    n: int = 2

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("dimension must be a positive integer")
        slope0 = self.psi(0.0, 1)
        if abs(slope0) > 1e-12:
            raise ValueError(f"psi'(0) must vanish, got {slope0!r}")

    def f(self, r):
        return np.exp(self.psi(r))

    def kappa(self, r):
        """psi'' + g', the stability function of centered spheres."""
        return self.psi(r, 2) + self.g(r, 1)

    @property
    def omega(self) -> float:
        return unit_ball_volume(self.n)

    @property
    def knots(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.psi.knots) | set(self.g.knots)))

    def knots_between(self, a: float, b: float) -> list[float]:
        return [k for k in self.knots if a < k < b]

    def with_dimension(self, n: int) -> "WeightPair":
        return WeightPair(self.psi, self.g, n)

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        cp["pair"] = {"n": str(self.n)}
        for name in ("psi", "g"):
            prof = getattr(self, name)
            cp[name] = {"kind": prof.kind, **prof.to_params()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "WeightPair":
        cp = configparser.ConfigParser()
        cp.read_string(text)
        n = int(cp["pair"]["n"]) if cp.has_section("pair") else 2
        return cls(profile_from_params(dict(cp["psi"])), profile_from_params(dict(cp["g"])), n)


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    strict: bool
    kappa_uniform: float | None
    psi_monotone: bool
    g_monotone: bool
    psi_min_at_origin: bool
    grid_used: str
    kappa_min: float
    g_nonnegative: bool
    g_slope_at_origin: float

    @property
    def g_kink_at_origin(self) -> bool:
        """True when the even extension of g has a corner at 0."""
        return self.g_slope_at_origin != 0.0


def classify(pair: WeightPair, r_max: float = 10.0, samples: int = 2000) -> AdmissibilityReport:
    """Grid-certified admissibility report on [0, r_max].

    Limits are only certified at the sampling resolution, which is recorded in
    ``grid_used``.
    """
    if samples < 100:
        raise PreconditionError("classify needs at least 100 samples")
    grid = np.linspace(0.0, r_max, samples)
    knots = [k for k in pair.knots if k <= r_max]
    if knots:
        grid = np.unique(np.concatenate([grid, knots]))
    kap = pair.kappa(grid)
    kappa_min = float(kap.min())
    positive = grid > 0
    kappa_min_pos = float(kap[positive].min())
    admissible = kappa_min >= -ADMISSIBLE_TOL
    strict = admissible and kappa_min_pos > 1e-12
    kappa_uniform = kappa_min if strict and kappa_min > 1e-12 else None
    psi_vals = pair.psi(grid)
    return AdmissibilityReport(
        admissible=bool(admissible),
        strict=bool(strict),
        kappa_uniform=kappa_uniform,
        psi_monotone=bool(np.all(pair.psi(grid, 1) >= -1e-12)),
        g_monotone=bool(np.all(pair.g(grid, 1) >= -1e-12)),
        psi_min_at_origin=bool(psi_vals.min() >= psi_vals[0] - 1e-12),
        grid_used=f"uniform {samples} points on [0, {r_max:g}] plus {len(knots)} knots",
        kappa_min=kappa_min,
        g_nonnegative=bool(np.all(pair.g(grid) >= 0)),
        g_slope_at_origin=float(pair.g(0.0, 1)),
    )


# --- counterexample constructions -------------------------------------------------


def g_monotone_gap_bound(M: float, v: float, eps: float, n: int) -> float:
    """Lower bound on E(B) - E(B') of the first construction before the delta term."""
    om = unit_ball_volume(n)
    return om ** (1 / n) * v ** ((n - 1) / n) * M - 3 * om * M * math.exp(M) * eps ** (n - 1)


def check_g_monotone_parameters(M, L, L_prime, L_second, eps, h, delta, v, n) -> None:
    om = unit_ball_volume(n)
    if n < 2:
        raise InfeasibleConstructionError("n >= 2")
    if not (M > 0 and v > 0 and eps > 0 and h > 0 and delta >= 0):
        raise InfeasibleConstructionError("M, v, eps, h > 0 and delta >= 0")
    if not 0 < eps < L:
        raise InfeasibleConstructionError("eps < L")
    vmax = min(om * math.exp(M) * L**n / 2, om * math.exp(M / 2) * (L_second - L_prime) ** n)
    if not v < vmax:
        raise InfeasibleConstructionError(
            "v < min{omega_n e^M L^n / 2, omega_n e^(M/2) (L'' - L')^n}",
            f"volume {v} must be below {vmax:.6g}",
        )
    eps_cap = (0.25 * math.exp(-M) * om ** ((1 - n) / n) * v ** ((n - 1) / n)) ** (1 / (n - 1))
    if not eps ** (n - 1) <= 0.25 * math.exp(-M) * om ** ((1 - n) / n) * v ** ((n - 1) / n):
        raise InfeasibleConstructionError(
            "eps^(n-1) <= e^(-M) omega_n^((1-n)/n) v^((n-1)/n) / 4",
            f"eps = {eps} exceeds the bound {eps_cap:.4g}",
        )
    h_min = v / om * math.exp(-M) * eps ** (1 - n)
    if not h >= h_min:
        raise InfeasibleConstructionError(
            "h >= (v / omega_n) e^(-M) eps^(1-n)", f"h = {h} is below {h_min:.6g}"
        )
    if not (abs(L_prime - (L + h)) <= 1e-12 * max(1.0, L_prime) and L_prime < L_second):
        raise InfeasibleConstructionError("L' = L + h < L''")
    bound = g_monotone_gap_bound(M, v, eps, n)
    if not delta * L_second * v < bound:
        raise InfeasibleConstructionError(
            "delta L'' v < omega_n^(1/n) v^((n-1)/n) M - 3 omega_n M e^M eps^(n-1)",
            f"delta = {delta} too large",
        )


def _ramp(width: float, v0: float, s0: float, s1: float) -> tuple[float, ...]:
    """C^3 blend whose slope moves from s0 to s1 along a quintic smoothstep."""
    return hermite_coefficients(
        width, (v0, s0, 0.0, 0.0), (v0 + 0.5 * (s0 + s1) * width, s1, 0.0, 0.0)
    )


def _blend(width: float, left, right) -> tuple[float, ...]:
    """Septic blend between (value, slope) states with flat curvature at both ends."""
    return hermite_coefficients(width, (*left, 0.0, 0.0), (*right, 0.0, 0.0))


def _negated_slope(psi: Piecewise, i: int, level: float) -> np.ndarray:
    """Local coefficients of ``level - (psi'(r) - psi'(b_i))`` on piece i."""
    d = psi.piece_coefficients(i, 1)
    return np.concatenate([[level], -d[1:]])


def make_counterexample_g_monotone(
    M: float = 1.0,
    L: float = 1.0,
    L_prime: float | None = None,
    L_second: float = 5.0,
    eps: float = 0.04,
    h: float = 3.0,
    delta: float = 1e-3,
    v: float = 1.0,
    n: int = 2,
    C: float = 1.0,
    tail_slope: float | None = None,
) -> WeightPair:
    """Weights with g' >= 0 and psi minimal at 0 where centered balls lose.

    psi rises from 0 to M on [0, eps] with slope at most 2M/eps (exactly
    quadratic on [0, eps/4]), stays at M up to L, drops to M/2 across
    [L, L + h], is flat on [L', L''] and grows linearly past a convex ramp of
    unit width. Every piece is C^3 at its ends with psi'' = psi''' = 0 where
    the convexity of psi changes, so g, which absorbs the concave parts of
    psi, is C^2. g also carries ``delta * r`` (ramped in on [0, eps/4]) and
    turns to slope 1 past L''.
    """
    if L_prime is None:
        L_prime = L + h
    check_g_monotone_parameters(M, L, L_prime, L_second, eps, h, delta, v, n)
    if tail_slope is None:
        tail_slope = M / 2
    c = 4 * M / eps**2
    w_tail = 1.0
    e1 = eps / 4
    b = [0.0, e1, eps / 2, eps, L, L + h / 2, L_prime, L_second, L_second + w_tail]
    s_rise = 2 * M / eps
    s_drop = -M / h
    psi_pieces = [
        (0.0, 0.0, 0.5 * c),
        hermite_coefficients(e1, (0.5 * c * e1 * e1, c * e1, c, 0.0), (M / 2, s_rise, 0.0, 0.0)),
        _blend(eps / 2, (M / 2, s_rise), (M, 0.0)),
        (M,),
        _blend(h / 2, (M, 0.0), (0.75 * M, s_drop)),
        _blend(h / 2, (0.75 * M, s_drop), (M / 2, 0.0)),
        (M / 2,),
        _ramp(w_tail, M / 2, 0.0, tail_slope),
        (M / 2 + 0.5 * tail_slope * w_tail, tail_slope),
    ]
    psi = Piecewise(tuple(b), tuple(psi_pieces))

    # g = C - int_0^r min(psi'', 0) grows only on the concave pieces 2 and 4
    g_pieces = []
    level = C
    for i in range(len(b) - 1):
        if i in (2, 4):
            piece = _negated_slope(psi, i, level)
            level = float(npoly.polyval(b[i + 1] - b[i], piece))
        elif i == 7:
            piece = np.array(_ramp(w_tail, level, 0.0, 1.0))
            level += 0.5 * w_tail
        else:
            piece = np.array([level])
        g_pieces.append(piece)
    g_pieces.append(np.array([level, 1.0]))
    alpha = [np.array(_ramp(e1, 0.5 * delta * e1, 0.0, delta))]
    alpha += [np.array([delta * bi, delta]) for bi in b[1:]]
    g = Piecewise(tuple(b), tuple(tuple(npoly.polyadd(p, q)) for p, q in zip(g_pieces, alpha)))
    return WeightPair(psi, g, n)


def make_counterexample_psi_monotone(
    eps: float = 0.05, g0: float = 10.0, n: int = 2, delta: float | None = None
) -> WeightPair:
    """Weights with psi' >= 0 where a ball just outside r = 1/eps beats the centered one.

    psi = 0 on [0, 1/eps] and psi = eps (r - 1/eps)^2 past 1/eps + eps^2, with
    a convex C^3 connector between. g = g0 - psi' on [0, 10 + 1/eps], then a
    C^2 ramp to slope 1, plus ``delta * r`` (default ``1e-4 eps^2``) which
    makes the pair kappa-uniformly admissible with kappa = delta. Since psi is
    flat near 0 this term leaves g'(0) = delta, which classify flags.
    """
    if not 0 < eps <= 0.1:
        raise PreconditionError("eps must lie in (0, 0.1]")
    if delta is None:
        delta = 1e-4 * eps**2
    a = 1 / eps
    T = 10 + a
    max_slope = 2 * eps * (T - a)
    if not g0 - max_slope > 0:
        raise PositivityError(f"g0 = {g0} must exceed max psi' = {max_slope:.6g} on [0, 10 + 1/eps]")
    b = [0.0, a, a + eps**2, T, T + 1.0]
    conn = hermite_coefficients(eps**2, (0.0, 0.0, 0.0, 0.0), (eps**5, 2 * eps**3, 2 * eps, 0.0))

    def quad_local(bi):
        d = bi - a
        return (eps * d * d, 2 * eps * d, eps)

    psi = Piecewise(tuple(b), ((0.0,), conn, quad_local(b[2]), quad_local(b[3]), quad_local(b[4])))
    g_pieces = [np.array([g0])]
    for i in (1, 2):
        g_pieces.append(_negated_slope(psi, i, float(g0 - psi(b[i], 1))))
    gT = g0 - max_slope
    g_pieces.append(np.array(_ramp(1.0, gT, -2 * eps, 1.0)))
    g_pieces.append(np.array([gT + 0.5 * (1.0 - 2 * eps), 1.0]))
    g = Piecewise(
        tuple(b),
        tuple(tuple(npoly.polyadd(p, [delta * bi, delta])) for p, bi in zip(g_pieces, b)),
    )
    return WeightPair(psi, g, n)


def psi_monotone_gap_coefficient(n: int, R: float) -> float:
    """Leading coefficient of (E(B) - E(B')) / eps for the second construction."""
    return (n - 1) / (n + 2) * R ** (n + 1) * unit_ball_volume(n)
