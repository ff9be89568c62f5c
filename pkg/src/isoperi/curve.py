"""Generating curves of axisymmetric surfaces with constant weighted mean curvature.

A surface of revolution around the e_1 axis is described by a planar curve
gamma(s) = (gamma_1, gamma_2), gamma_2 >= 0, parametrized by arc length with
tangent (cos theta, sin theta). With outward normal nu = sigma (sin theta,
-cos theta) the weighted mean curvature is

    Hbar = kappa + (n - 2) lambda + psi'(|gamma|) (gamma . nu) / |gamma| + g(|gamma|)

where kappa = sigma theta' is the curve curvature and lambda = nu_2 / gamma_2
the rotational principal curvature. Solving for theta' gives the shooting ODE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, SingularInputError, StateError
from .weights import WeightPair

PHASES = ("upper", "lower", "curl", "other")
TERMINATIONS = (
    "closed",
    "axis-crossing-nonperpendicular",
    "tangent-violation",
    "radius-exceeded",
    "max-length",
)


def _geometry(state, pair: WeightPair, sigma: float):
    g1, g2, th = state
    r = math.hypot(g1, g2)
    if r == 0.0:
        raise SingularInputError("the curve reached the origin")
    nu1, nu2 = sigma * math.sin(th), -sigma * math.cos(th)
    h1 = pair.psi(r, 1) * (g1 * nu1 + g2 * nu2) / r + pair.g(r)
    return r, nu2, h1


def curvatures(state, pair: WeightPair, n: int, Hbar: float, sigma: float = 1.0, axis_eps: float = 0.0):
    """(kappa, lambda, H1) at a state, with the axis limit kappa = lambda near gamma_2 = 0."""
    g1, g2, th = state
    _, nu2, h1 = _geometry(state, pair, sigma)
    if abs(g2) <= axis_eps:
        kappa = (Hbar - h1) / (n - 1)
        return kappa, kappa, h1
    lam = nu2 / g2
    return Hbar - (n - 2) * lam - h1, lam, h1


def rhs(state, pair: WeightPair, n: int, Hbar: float, sigma: float = 1.0, axis_eps: float = 0.0):
    """Derivative (gamma_1', gamma_2', theta') of the shooting ODE."""
    kappa, _, _ = curvatures(state, pair, n, Hbar, sigma, axis_eps)
    th = state[2]
    return np.array([math.cos(th), math.sin(th), sigma * kappa])


def _to_cartesian(y):
    r, a, b = y
    return np.array([r * np.cos(a), r * np.sin(a), a + b])


def _polar_rhs(y, pair: WeightPair, n: int, Hbar: float, sigma: float, axis_eps: float):
    """The shooting ODE in (r, alpha, beta) with gamma = r (cos alpha, sin alpha), theta = alpha + beta."""
    r, a, b = y
    if r == 0.0:
        raise SingularInputError("the curve reached the origin")
    h1 = sigma * pair.psi(r, 1) * math.sin(b) + pair.g(r)
    g2 = r * math.sin(a)
    if abs(g2) <= axis_eps:
        kappa = (Hbar - h1) / (n - 1)
    else:
        kappa = Hbar - h1 - (n - 2) * (-sigma * math.cos(a + b)) / g2
    turn = math.sin(b) / r
    return [math.cos(b), turn, sigma * kappa - turn]


@dataclass(frozen=True)
class ShootOptions:
    rtol: float = 1e-12
    atol: float = 1e-14
    margin: float | None = None  # default 3 R*
    max_length: float | None = None  # default 8 pi (R* + margin)
    stop_on_tangent: bool = False
    tangent_tol: float = 1e-8
    axis_eps_rel: float = 1e-8
    axis_guard_rel: float = 1e-3  # n >= 3: stop this close to the axis and extrapolate
    closed_tol: float = 1e-6
    mirror: bool = False
    samples: int = 2000


@dataclass
class CurveTrajectory:
    s: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    theta: np.ndarray
    Hbar: float
    R_star: float
    k0: float
    n: int
    termination: str
    phase_tags: list[str]
    sigma: float = 1.0
    end_state: tuple[float, float, float, float] = (math.nan,) * 4
    kappa: np.ndarray = field(default=None, repr=False)
    lam: np.ndarray = field(default=None, repr=False)
    H1: np.ndarray = field(default=None, repr=False)
    dense: object = field(default=None, repr=False)

    @property
    def H0(self) -> np.ndarray:
        return self.kappa + (self.n - 2) * self.lam

    def rows(self):
        """CSV rows (s, gamma1, gamma2, theta, kappa, lambda, H0, H1, phase)."""
        h0 = self.H0
        for i in range(len(self.s)):
            yield (
                self.s[i], self.gamma1[i], self.gamma2[i], self.theta[i],
                self.kappa[i], self.lam[i], h0[i], self.H1[i], self.phase_tags[i],
            )


def circle_mean_curvature(pair: WeightPair, n: int, R: float) -> float:
    """Weighted mean curvature of the centered sphere of radius R."""
    return (n - 1) / R + pair.psi(R, 1) + pair.g(R)


def shoot(pair: WeightPair, n: int, R_star: float, k0: float, options: ShootOptions | None = None) -> CurveTrajectory:
    """Integrate the generating curve from (R*, 0) heading along +-e_2 with kappa(0) = k0."""
    if R_star <= 0 or k0 <= 0:
        raise ValueError("need R_star > 0 and k0 > 0")
    opt = options or ShootOptions()
    sigma = -1.0 if opt.mirror else 1.0
    Hbar = (n - 1) * k0 + pair.psi(R_star, 1) + pair.g(R_star)
    margin = 3 * R_star if opt.margin is None else opt.margin
    max_len = 8 * math.pi * (R_star + margin) if opt.max_length is None else opt.max_length
    axis_eps = opt.axis_eps_rel * R_star
    guard = opt.axis_guard_rel * R_star if n >= 3 else 0.0

    def f(s, y):
        return _polar_rhs(y, pair, n, Hbar, sigma, axis_eps)

    def axis(s, y):
        return sigma * y[0] * math.sin(y[1]) - guard

    axis.terminal = True
    axis.direction = -1

    def radius(s, y):
        return y[0] - (R_star + margin)

    radius.terminal = True
    radius.direction = 1

    events = [axis, radius]
    if opt.stop_on_tangent:
        def tangent(s, y):
            if s < 1e-6 * R_star:
                return -1.0
            return y[0] * math.cos(y[2]) - opt.tangent_tol * R_star

        tangent.terminal = True
        tangent.direction = 1
        events.append(tangent)

    # polar state (r, alpha, beta = theta - alpha): the centered circle is an exact
    # equilibrium, so truncation error does not feed its exponential instability
    y0 = [R_star, 0.0, sigma * math.pi / 2]
    sol = solve_ivp(
        f, (0.0, max_len), y0, method="DOP853", rtol=opt.rtol, atol=opt.atol,
        dense_output=True, events=events, first_step=1e-4 * R_star, max_step=0.02 * (R_star + margin),
    )
    partial = None
    if sol.status == -1:
        partial = sol
        raise IntegrationError(f"integration failed: {sol.message}", partial=partial)

    s_end = float(sol.t[-1])
    y_end = _to_cartesian(sol.y[:, -1])
    termination = "max-length"
    if sol.status == 1:
        if len(sol.t_events[0]):
            termination = "axis"
        elif len(sol.t_events[1]):
            termination = "radius-exceeded"
        else:
            termination = "tangent-violation"

    if termination == "axis":
        if guard > 0:
            # straight-line completion to the axis
            step = abs(y_end[1] / math.sin(y_end[2]))
            dth = rhs(y_end, pair, n, Hbar, sigma, axis_eps)[2]
            y_end = np.array([
                y_end[0] + step * math.cos(y_end[2]), 0.0, y_end[2] + step * dth,
            ])
            s_end += step
        angle_err = _wrap(y_end[2] - sigma * 1.5 * math.pi)
        termination = "closed" if abs(angle_err) <= opt.closed_tol else "axis-crossing-nonperpendicular"

    def dense(s):
        return _to_cartesian(sol.sol(s))

    s = np.linspace(0.0, float(sol.t[-1]), opt.samples)
    ys = dense(s)
    traj = CurveTrajectory(
        s=s, gamma1=ys[0], gamma2=ys[1], theta=ys[2], Hbar=Hbar, R_star=R_star, k0=k0, n=n,
        termination=termination, phase_tags=[], sigma=sigma,
        end_state=(s_end, float(y_end[0]), float(y_end[1]), float(y_end[2])), dense=dense,
    )
    kap, lam, h1 = [], [], []
    for i in range(len(s)):
        k, l, h = curvatures(ys[:, i], pair, n, Hbar, sigma, axis_eps if abs(ys[1, i]) > guard else max(axis_eps, guard))
        kap.append(k)
        lam.append(l)
        h1.append(h)
    traj.kappa, traj.lam, traj.H1 = np.array(kap), np.array(lam), np.array(h1)
    traj.phase_tags = _phase_tags(traj)
    return traj


def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def closure_residual(traj: CurveTrajectory) -> tuple[float, float]:
    """(|gamma_2|, signed angle from the perpendicular crossing) at the axis."""
    if traj.termination not in ("closed", "axis-crossing-nonperpendicular"):
        raise StateError(f"trajectory ended with {traj.termination!r}, not at the axis")
    _, _, g2, th = traj.end_state
    return abs(g2), _wrap(th - traj.sigma * 1.5 * math.pi)


def _quadrants(theta: np.ndarray, sigma: float, tol: float = 1e-9):
    c = np.cos(theta)
    s = sigma * np.sin(theta)
    q2 = (c <= tol) & (s >= -tol)
    q3 = (c <= tol) & (s <= tol)
    q4 = (c >= -tol) & (s <= tol)
    return q2, q3, q4


def _phase_tags(traj: CurveTrajectory) -> list[str]:
    """Sequential segmentation: upper, then lower, then curl, then other."""
    q2, q3, q4 = _quadrants(traj.theta, traj.sigma)
    tol = 1e-9 * max(1.0, abs(traj.Hbar))
    tags = []
    phase = 0
    for i in range(len(traj.s)):
        k, l = traj.kappa[i], traj.lam[i]
        conds = (
            q2[i] and k >= l - tol and l > 0,
            q3[i],
            q4[i] and k > 0,
        )
        while phase < 3 and not conds[phase]:
            phase += 1
        tags.append(PHASES[phase])
    return tags


@dataclass(frozen=True)
class CurveDiagnostics:
    tangent_max: float
    first_tangent_violation: float | None
    min_H0: float
    phases: tuple[tuple[str, float, float], ...]
    lower_curves_faster: bool | None
    upper_graphical: bool
    crossing_angle: float | None
    apple_point_ok: bool | None
    H_deviation: float


def _segments(traj: CurveTrajectory):
    out = []
    start = 0
    for i in range(1, len(traj.s) + 1):
        if i == len(traj.s) or traj.phase_tags[i] != traj.phase_tags[start]:
            out.append((traj.phase_tags[start], float(traj.s[start]), float(traj.s[i - 1])))
            start = i
    return tuple(out)


def mean_curvature_deviation(traj: CurveTrajectory, pair: WeightPair) -> float:
    """Max |kappa + (n-2) lambda + H1 - Hbar| with kappa from differences of the dense theta.

    Points within 1e-3 R* of the axis (where lambda is a 0/0 quotient) are skipped.
    The difference step follows the local length scale min(R*, |gamma_2|, 1/|kappa|).
    """
    s_end = traj.s[-1]
    h_max = 1e-3 * traj.R_star
    mask = (traj.s > 2 * h_max) & (traj.s < s_end - 2 * h_max) & (np.abs(traj.gamma2) > 1e-3 * traj.R_star)
    s = traj.s[mask]
    if not len(s):
        return 0.0
    scale = np.minimum(traj.R_star, np.abs(traj.gamma2[mask]))
    scale = np.minimum(scale, 1 / np.maximum(np.abs(traj.kappa[mask]), 1e-300))
    h = 1e-3 * scale
    th = [traj.dense(s + k * h)[2] for k in (-2, -1, 1, 2)]
    dth = (th[0] - 8 * th[1] + 8 * th[2] - th[3]) / (12 * h)
    kappa = traj.sigma * dth
    g1, g2 = traj.gamma1[mask], traj.gamma2[mask]
    theta = traj.theta[mask]
    nu2 = -traj.sigma * np.cos(theta)
    lam = nu2 / g2
    r = np.hypot(g1, g2)
    nu1 = traj.sigma * np.sin(theta)
    h1 = pair.psi(r, 1) * (g1 * nu1 + g2 * nu2) / r + pair.g(r)
    return float(np.max(np.abs(kappa + (traj.n - 2) * lam + h1 - traj.Hbar)))


def diagnostics(traj: CurveTrajectory, pair: WeightPair, tangent_tol: float = 1e-8) -> CurveDiagnostics:
    dot = traj.gamma1 * np.cos(traj.theta) + traj.gamma2 * np.sin(traj.theta)
    later = traj.s > 0
    tmax = float(dot[later].max()) if later.any() else 0.0
    viol = np.nonzero(later & (dot > tangent_tol * traj.R_star))[0]
    first = float(traj.s[viol[0]]) if len(viol) else None

    tags = np.array(traj.phase_tags)
    up, low = tags == "upper", tags == "lower"
    faster = None
    graphical = True
    if up.any() and low.any():
        hu, ku = np.abs(traj.gamma2[up]), traj.kappa[up]
        graphical = bool(np.all(np.diff(hu) > 0))
        order = np.argsort(hu)
        hl, kl = np.abs(traj.gamma2[low]), traj.kappa[low]
        inside = (hl >= hu.min()) & (hl <= hu.max())
        if inside.any():
            ref = np.interp(hl[inside], hu[order], ku[order])
            faster = bool(np.all(kl[inside] >= ref - 1e-7 * max(1.0, abs(traj.Hbar))))

    angle = apple = None
    if traj.termination in ("closed", "axis-crossing-nonperpendicular"):
        th_end = traj.end_state[3]
        angle = _wrap(th_end - traj.sigma * 1.5 * math.pi)
        apple = bool(math.cos(th_end) >= -1e-9)
    return CurveDiagnostics(
        tangent_max=tmax,
        first_tangent_violation=first,
        min_H0=float(traj.H0.min()),
        phases=_segments(traj),
        lower_curves_faster=faster,
        upper_graphical=graphical,
        crossing_angle=angle,
        apple_point_ok=apple,
        H_deviation=mean_curvature_deviation(traj, pair),
    )


def closure_sweep(pair: WeightPair, n: int, R_star: float, k_values, options: ShootOptions | None = None):
    """Rows (k0, position_error, angle_error, termination) for a grid of k0."""
    rows = []
    for k0 in k_values:
        traj = shoot(pair, n, R_star, float(k0), options)
        if traj.termination in ("closed", "axis-crossing-nonperpendicular"):
            pe, ae = closure_residual(traj)
        else:
            pe = ae = math.nan
        rows.append((float(k0), pe, ae, traj.termination))
    return rows
