"""Acceptance suite: one PASS/FAIL line per criterion, with pinned tolerances and time budgets.

Run under pytest (lines are printed even with output capture on) or directly
with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest

from isoperi import calibrate as cal
from isoperi import curve, nearly_spherical as ns, one_dim, radial, symmetrize as sym
from isoperi.rng import SplitMix64
from isoperi.weights import (
    WeightPair,
    classify,
    gaussian,
    make_counterexample_g_monotone,
    make_counterexample_psi_monotone,
    polynomial,
    zero,
)

BUDGET = {1: 5, 2: 60, 3: 30, 4: 60, 5: 60, 6: 120, 7: 120, 8: 30, 9: 60}


def _report(number: int, ok: bool, detail: str, elapsed: float) -> bool:
    in_time = elapsed < BUDGET[number]
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {number}: {status}  {detail}  [{elapsed:.2f} s / {BUDGET[number]} s]"
    print(line, flush=True)
    return ok and in_time


def _timed(func):
    start = time.perf_counter()
    ok, detail = func()
    return ok, detail, time.perf_counter() - start


def _poly_pair(rng, n):
    """psi = a r^2 + b r^4 and g = c + d r + e r^2: monotone, strictly admissible."""
    a, b = rng.uniform(0.1, 1.0), rng.uniform(0.0, 0.05)
    c, d, e = rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.5), rng.uniform(0.0, 0.2)
    return WeightPair(polynomial(0.0, 0.0, a, 0.0, b), polynomial(c, d, e), n)


# --- 1: profile derivatives --------------------------------------------------------


def criterion_1():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(50):
        pair = _poly_pair(rng, int(rng.integers(2, 4)))
        r = rng.uniform(0.2, 3.0)
        p = radial.energy_profile_point(pair, r)
        n = pair.n
        # E'' is a difference of two terms, so its error is measured against their combined size
        scale2 = (r * r * abs(pair.kappa(r)) + n - 1) / (n * radial.omega(n) * r ** (n + 1) * math.exp(pair.psi(r)))
        worst = max(worst, abs(p.fd_dE_dv - p.dE_dv) / abs(p.dE_dv), abs(p.fd_d2E_dv2 - p.d2E_dv2) / scale2)
    flat = radial.energy_profile_point(WeightPair(zero(), zero(), 2), 2.0)
    exact = abs(flat.dE_dv - 0.5) <= 1e-12 and abs(flat.d2E_dv2 + 1 / (16 * math.pi)) <= 1e-12
    return worst <= 1e-4 and exact, f"max rel err {worst:.2e} (<= 1e-4), flat values exact: {exact}"


# --- 2: one-dimensional minimizers -------------------------------------------------


def criterion_2():
    rng = np.random.default_rng(202)
    worst = 0.0
    centered_ok = True
    for _ in range(10):
        pair = WeightPair(polynomial(0, 0, rng.uniform(0.1, 1.0)), polynomial(rng.uniform(0, 1), rng.uniform(0, 0.5)), 1)
        assert classify(pair).strict and classify(pair).psi_min_at_origin
        v = rng.uniform(0.2, 2.0)
        union, best = one_dim.brute_force_min(pair, v, max_intervals=3, grid_points=200)
        tables = one_dim.tables_for_length(pair, v)
        c = one_dim.centered_interval(tables, v).intervals[0][1]
        centered = one_dim.interval_energy(pair, -c, c).total
        worst = max(worst, abs(best - centered))
        (a, b), = union.intervals if len(union.intervals) == 1 else ((0.0, -1.0),)
        centered_ok &= len(union.intervals) == 1 and abs(a + b) <= 1e-4 and b > 0
    wins = 0
    vols = np.linspace(0.05, 0.5, 10)
    for amp, freq in ((1.0, 1.0), (0.5, 2.0), (0.3, 1.5)):
        # psi = amp (cos(freq r) - 1) dips below psi(0); g = amp freq^2 r restores admissibility
        pair = WeightPair(polynomial(-amp, trig=((amp, freq, 0.0),)), polynomial(0, amp * freq**2), 1)
        for v in vols:
            union, best = one_dim.brute_force_min(pair, float(v), max_intervals=1)
            centered = one_dim.interval_energy(pair, -v / 2, v / 2).total
            a, b = union.intervals[0]
            if best < centered - 1e-6 and a > 0:
                wins += 1
                break
    ok = worst <= 1e-6 and centered_ok and wins == 3
    return ok, f"centered gap {worst:.1e} (<= 1e-6), centered shape {centered_ok}, off-center wins {wins}/3"


# --- 3: counterexample with g monotone ---------------------------------------------


def criterion_3():
    pair = make_counterexample_g_monotone()
    rep = classify(pair)
    tau = radial.annulus_ball_radius(2, 1.0, 0.5)
    cmp_ = radial.compare_with_offcenter(pair, 4.0 + tau, tau)
    margin = 0.5 * (math.sqrt(math.pi) - 3 * math.pi * math.e * 0.04)
    ok = cmp_.gap >= margin and rep.kappa_uniform is not None and rep.psi_min_at_origin
    return ok, f"E(B)-E(B') = {cmp_.gap:.5f} (>= {margin:.5f}), kappa-uniform, min at origin: {ok}"


# --- 4: counterexample with psi monotone -------------------------------------------


def criterion_4():
    R, n = 0.5, 2
    target = (n - 1) / (n + 2) * R ** (n + 1) * radial.omega(n)
    ratios = []
    for eps in (0.05, 0.02, 0.01):
        pair = make_counterexample_psi_monotone(eps, 10.0, n)
        ratios.append(radial.compare_with_offcenter(pair, 1 / eps + R, R).gap / eps)
    errs = [abs(q - target) / target for q in ratios]
    ok = errs[-1] <= 0.15 and errs[0] >= errs[1] >= errs[2]
    return ok, "gap/eps " + ", ".join(f"{q:.5f}" for q in ratios) + f" -> {target:.5f} (last within {errs[-1]:.1%} <= 15%)"


# --- 5: calibration certificate ----------------------------------------------------


def criterion_5():
    rng = np.random.default_rng(505)
    h_min = hp_min = math.inf
    wins = True
    for k in range(10):
        pair = _poly_pair(rng, 2 + k % 2)
        rep = cal.certify(pair)
        h_min, hp_min = min(h_min, rep.h_min), min(hp_min, rep.hprime_min)
        R = rep.r_star * rng.uniform(1.0, 1.5)
        check = cal.large_volume_check(pair, R, d_grid=np.linspace(0.1 * R, R, 6))
        wins &= bool(check.centered_wins)
    ok = h_min >= -1e-10 and hp_min >= -1e-10 and wins
    return ok, f"min h {h_min:.3g}, min h' {hp_min:.3g} (>= -1e-10), centered wins: {wins}"


# --- 6: generating curves ----------------------------------------------------------


def criterion_6():
    rng = np.random.default_rng(606)
    worst_circle = worst_dev = 0.0
    spurious = 0
    for k in range(20):
        n = 2 + k % 2
        pair = _poly_pair(rng, n)
        R = rng.uniform(0.5, 3.0)
        traj = curve.shoot(pair, n, R, 1 / R)
        if traj.termination != "closed":
            worst_circle = math.inf
        else:
            pe, ae = curve.closure_residual(traj)
            worst_circle = max(worst_circle, pe / R, abs(ae))
        worst_dev = max(worst_dev, curve.diagnostics(traj, pair).H_deviation)
        for factor in (0.7, 0.8, 0.9, 1.1, 1.2, 1.3):
            t = curve.shoot(pair, n, R, factor / R)
            worst_dev = max(worst_dev, curve.diagnostics(t, pair).H_deviation)
            if t.termination in ("closed", "axis-crossing-nonperpendicular"):
                pe, ae = curve.closure_residual(t)
                spurious += max(pe / R, abs(ae)) < 1e-4
    ok = worst_circle < 1e-6 and worst_dev <= 1e-7 and spurious == 0
    return ok, f"circle residual {worst_circle:.1e} (< 1e-6), Hbar drift {worst_dev:.1e} (<= 1e-7), perturbed closures {spurious}"


# --- 7: Fuglede-type stability -----------------------------------------------------


def _fuglede_trials(n: int, rng: SplitMix64):
    pair = WeightPair(gaussian(), polynomial(0.2, 0.1), n)
    grid = ns.SphereGrid.for_dimension(n, 64 if n == 2 else 32)
    target = radial.weighted_ball_volume(pair, 1.0)
    failures = 0
    worst = math.inf
    for _ in range(100):
        u = ns.random_bandlimited(grid, rng, 8 if n == 2 else 6, 0.5)
        amp = rng.uniform(1e-3, 9e-3)
        gs = ns.GraphSet.from_values(grid, 1.0, u)
        gs = ns.GraphSet.from_values(grid, 1.0, u * amp / gs.w1inf())
        gs, _ = ns.volume_correct(pair, gs, target)
        res = ns.fuglede_gap(pair, 1.0, gs)
        failures += res.gap < res.lower_bound
        worst = min(worst, res.gap / res.lower_bound)
    return failures, worst


def criterion_7():
    rng = SplitMix64(7)
    f2, w2 = _fuglede_trials(2, rng.spawn())
    f3, w3 = _fuglede_trials(3, rng.spawn())
    pair = WeightPair(gaussian(), zero(), 2)
    grid = ns.SphereGrid.circle(128)
    t = 1e-3
    w = np.cos(2 * grid.phi)
    gs, _ = ns.volume_correct(pair, ns.GraphSet.from_values(grid, 1.0, t * w), radial.weighted_ball_volume(pair, 1.0))
    gap = ns.fuglede_gap(pair, 1.0, gs).gap
    half_tq = 0.5 * t * t * ns.second_variation_Q(pair, 1.0, grid, w)
    rel = abs(gap - half_tq) / half_tq
    ok = f2 == f3 == 0 and rel <= 0.10
    return ok, f"violations n=2: {f2}, n=3: {f3} (min gap/bound {min(w2, w3):.2f}); |gap - t^2 Q/2| rel {rel:.1e} (<= 10%)"


# --- 8: symmetrization -------------------------------------------------------------


def criterion_8():
    rng = np.random.default_rng(808)
    vol_err = pot_err = per_excess = 0.0
    idem = True
    for k in range(200):
        n = 2 + k % 2
        pair = WeightPair(polynomial(0, 0, rng.uniform(0, 0.5)), polynomial(rng.uniform(0, 1), rng.uniform(0, 1)), n)
        F = sym.random_polar_set(rng, n, shells=int(rng.integers(1, 6)))
        S = sym.symmetrize(F)
        a, b = sym.measures(pair, F), sym.measures(pair, S)
        vol_err = max(vol_err, abs(a.volume - b.volume) / max(1.0, a.volume))
        pot_err = max(pot_err, abs(a.potential - b.potential) / max(1.0, a.potential))
        per_excess = max(per_excess, b.perimeter - a.perimeter)
        idem &= sym.symmetrize(S) == S
    ok = vol_err <= 1e-10 and pot_err <= 1e-10 and per_excess <= 1e-9 and idem
    return ok, f"volume err {vol_err:.1e}, potential err {pot_err:.1e} (<= 1e-10), perimeter excess {per_excess:.1e} (<= 1e-9), idempotent {idem}"


# --- 9: second-variation sign ------------------------------------------------------


def _mode_grid(grid: ns.SphereGrid, L: int):
    modes, Y, _, _ = ns._tables(grid.n, grid.shape, L)
    return [(m, Y[k]) for k, m in enumerate(modes) if m[0] >= 1]


def criterion_9():
    rng = np.random.default_rng(909)
    grids = {2: ns.SphereGrid.circle(64), 3: ns.SphereGrid.sphere(16)}
    modes = {n: _mode_grid(g, 6) for n, g in grids.items()}
    agree = 0
    worst_translation = 0.0
    for k in range(20):
        n = 2 + k % 2
        a = rng.uniform(0.1, 1.0)
        # slope of g chosen so that kappa(R) = 2a + d straddles zero, with one exact zero
        d = -2 * a if k == 0 else rng.uniform(-3 * a, a)
        pair = WeightPair(polynomial(0, 0, a), polynomial(5.0, d), n)
        R = rng.uniform(0.5, 2.0)
        grid = grids[n]
        qs = np.array([ns.second_variation_Q(pair, R, grid, y) for _, y in modes[n]])
        scale = max(1.0, float(np.abs(qs).max()))
        stable = bool(qs.min() >= -1e-12 * scale)
        agree += stable == (pair.kappa(R) >= 0)
        f = math.exp(pair.psi(R))
        for (i, _), y in modes[n]:
            if i == 1:
                q = ns.second_variation_Q(pair, R, grid, y)
                exact = f * pair.kappa(R) * R ** (n - 1) * grid.integrate(y * y)
                worst_translation = max(worst_translation, abs(q - exact) / max(1.0, abs(exact)))
    ok = agree == 20 and worst_translation <= 1e-9
    return ok, f"sign criterion matched on {agree}/20 pairs, translation identity err {worst_translation:.1e} (<= 1e-9)"


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, detail, elapsed = _timed(CRITERIA[number])
    with capsys.disabled():
        passed = _report(number, ok, detail, elapsed)
    assert passed, detail


if __name__ == "__main__":
    results = [_report(k, *_timed(f)) for k, f in CRITERIA.items()]
    sys.exit(0 if all(results) else 1)
