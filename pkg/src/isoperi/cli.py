"""Command-line runner: ``isoperi run|validate|plot``.

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 invalid config,
3 numeric failure. Every run writes ``report.csv`` and ``summary.txt`` (plus
``plot.svg`` unless disabled) into the configured output directory.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import calibrate, curve, nearly_spherical as ns, one_dim, radial, symmetrize as sym
from .config import ExperimentConfig, parse
from .errors import ConfigError, IsoperiError, PreconditionError, ResolutionError
from .rng import SplitMix64
from .svgplot import PlotError, plot
from .weights import (
    classify,
    g_monotone_gap_bound,
    make_counterexample_g_monotone,
    make_counterexample_psi_monotone,
    psi_monotone_gap_coefficient,
)

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class Report:
    header: list[str]
    rows: list[tuple] = field(default_factory=list)
    checks: list[tuple[str, bool]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    plot_columns: list[str] = field(default_factory=list)
    extra_tables: dict = field(default_factory=dict)

    def check(self, label: str, ok: bool) -> None:
        self.checks.append((label, bool(ok)))


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ISOPERI_THREADS", "1")))
    except ValueError:
        return 1


def _map(func, items):
    workers = _threads()
    if workers == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# --- experiments --------------------------------------------------------------


def _profile(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    for pt in radial.profile_sweep(cfg.pair, np.linspace(p["r_min"], p["r_max"], p["points"])):
        rep.rows.append((pt.r, pt.volume, pt.energy, pt.dE_dv, pt.d2E_dv2, pt.fd_dE_dv, pt.fd_d2E_dv2, pt.consistent))
    rep.check("analytic profile derivatives match finite differences", all(r[-1] for r in rep.rows))


def _one_dim(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    pair = cfg.pair
    vols = np.linspace(p["v_min"], p["v_max"], p["count"])
    tables = one_dim.tables_for_length(pair, float(vols.max()))
    worst = -math.inf
    for v in vols:
        union, best = one_dim.brute_force_min(pair, float(v), p["max_intervals"], p["grid_points"])
        c = one_dim.centered_interval(tables, float(v)).intervals[0][1]
        centered = one_dim.interval_energy(pair, -c, c).total
        worst = max(worst, centered - best)
        a, b = union.intervals[0][0], union.intervals[-1][1]
        rep.rows.append((v, len(union.intervals), a, b, best, centered, centered - best))
    report = classify(pair)
    if report.strict and report.psi_min_at_origin:
        rep.check("centered interval is optimal (gap <= 1e-6)", worst <= 1e-6)
    else:
        rep.notes.append("weights are not strictly admissible with psi minimal at 0: optimality not asserted")


def _curve_sweep(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    R = p["R_star"]
    ks = sorted(set(np.linspace(p["k_min"], p["k_max"], p["count"]).tolist()) | {1.0})
    rows = curve.closure_sweep(cfg.pair, cfg.n, R, [k / R for k in ks])
    for k0, pe, ae, term in rows:
        rep.rows.append((k0, k0 * R, pe, ae, term))
    circle = [r for r in rows if abs(r[0] * R - 1.0) < 1e-15][0]
    rep.check("k0 = 1/R* closes (residual < 1e-6)", circle[3] == "closed" and max(circle[1], abs(circle[2])) < 1e-6)
    report = classify(cfg.pair)
    if report.strict and report.psi_monotone and report.g_monotone:
        others = [r for r in rows if abs(r[0] * R - 1.0) > 0.05]
        closes = [r for r in others if r[3] in ("closed", "axis-crossing-nonperpendicular") and max(r[1], abs(r[2])) < 1e-4]
        rep.check("no perturbed k0 closes (residual >= 1e-4)", not closes)


def _fuglede(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    pair, R, n = cfg.pair, p["R"], cfg.n
    grid = ns.SphereGrid.for_dimension(n, p["resolution"])
    if p["degree"] > grid.max_degree:
        raise ResolutionError(f"degree {p['degree']} exceeds grid resolution {grid.max_degree}")
    target = ns.graph_volume(pair, ns.GraphSet.from_values(grid, R, np.zeros_like(grid.weights)))
    c = p["c_factor"] * min(1.0, R * R * float(pair.kappa(R)))
    fields = [ns.random_bandlimited(grid, rng, p["degree"], 0.5) for _ in range(p["trials"])]

    def trial(u):
        gs = ns.GraphSet.from_values(grid, R, u)
        gs = ns.GraphSet.from_values(grid, R, u * (p["amplitude"] / gs.w1inf()))
        gs, _ = ns.volume_correct(pair, gs, target)
        res = ns.fuglede_gap(pair, R, gs, eps=p["eps"], c=c)
        return math.sqrt(gs.l2_sq()), gs.w1inf(), res

    for i, (l2, w1, res) in enumerate(_map(trial, fields)):
        rep.rows.append((i, l2, w1, res.gap, res.lower_bound, res.ratio))
    rep.check("gap >= lower bound on every trial", all(r[3] >= r[4] for r in rep.rows))


def _symmetrize(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    sets = [sym.random_polar_set(rng, cfg.n, p["shells"], p["max_intervals"], p["r_max"]) for _ in range(p["trials"])]

    def trial(F):
        S = sym.symmetrize(F)
        return sym.measures(cfg.pair, F), sym.measures(cfg.pair, S), sym.symmetrize(S) == S

    vol_ok = pot_ok = per_ok = idem = True
    for i, (a, b, same) in enumerate(_map(trial, sets)):
        rep.rows.append((i, a.volume, b.volume, a.potential, b.potential, a.perimeter, b.perimeter))
        vol_ok &= abs(a.volume - b.volume) <= 1e-10 * max(1.0, a.volume)
        pot_ok &= abs(a.potential - b.potential) <= 1e-10 * max(1.0, abs(a.potential))
        per_ok &= b.perimeter <= a.perimeter + 1e-9
        idem &= same
    rep.check("volume preserved", vol_ok)
    rep.check("potential preserved", pot_ok)
    rep.check("perimeter non-increasing", per_ok)
    rep.check("symmetrization idempotent", idem)


def _counterexample_1(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    L_prime = p["L_prime"] if p["L_prime"] is not None else p["L"] + p["h"]
    pair = make_counterexample_g_monotone(
        p["M"], p["L"], L_prime, p["L_second"], p["eps"], p["h"], p["delta"], p["v"], cfg.n
    )
    report = classify(pair)
    tau = radial.annulus_ball_radius(cfg.n, p["v"], p["M"] / 2)
    cmp_ = radial.compare_with_offcenter(pair, L_prime + tau, tau)
    rep.rows.append(("B", 0.0, cmp_.centered_radius, cmp_.volume, cmp_.centered_energy))
    rep.rows.append(("B'", cmp_.offcenter_distance, cmp_.offcenter_radius, cmp_.volume, cmp_.offcenter_energy))
    bound = g_monotone_gap_bound(p["M"], p["v"], p["eps"], cfg.n)
    rep.notes.append(f"E(B) - E(B') = {cmp_.gap:.10g}; construction bound = {bound:.10g}")
    rep.check("E(B')−E(B) < 0", cmp_.gap > 0)
    rep.check("margin >= half the construction bound", cmp_.gap >= 0.5 * bound)
    rep.check("kappa-uniform", report.kappa_uniform is not None)
    rep.check("psi minimal at the origin", report.psi_min_at_origin)


def _counterexample_2(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    R = p["R"]
    target = psi_monotone_gap_coefficient(cfg.n, R)
    for eps in sorted(p["eps_list"], reverse=True):
        pair = make_counterexample_psi_monotone(eps, p["g0"], cfg.n)
        cmp_ = radial.compare_with_offcenter(pair, 1 / eps + R, R)
        rep.rows.append((eps, cmp_.centered_energy, cmp_.offcenter_energy, cmp_.gap, cmp_.gap / eps, target))
    rep.check("E(B)−E(B') > 0 for every eps", all(r[3] > 0 for r in rep.rows))
    last = rep.rows[-1][4]
    rep.check(f"gap/eps within {p['tolerance']:g} of the leading coefficient", abs(last - target) <= p["tolerance"] * target)


def _calibrate(cfg: ExperimentConfig, rep: Report, rng) -> None:
    p = cfg.params
    pair = cfg.pair
    report = classify(pair)
    if report.kappa_uniform is None:
        raise PreconditionError("weights are not kappa-uniformly admissible")
    cert = calibrate.certify(pair, report.kappa_uniform, p["samples"])
    scaled = calibrate.rescale(pair, report.kappa_uniform)
    grid = np.linspace(1e-6, 4 * math.sqrt(cfg.n + 2), p["samples"])
    h, hp = calibrate.h_field(scaled, grid)
    for r, a, b, c in zip(grid, calibrate.ell(grid, cfg.n), h, hp):
        rep.rows.append((r, a, b, c))
    rep.check("calibration certificate (h >= 0, h' >= 0)", cert.certified)
    R = p["R"] if p["R"] is not None else cert.r_star
    lv = calibrate.large_volume_check(pair, R, np.linspace(0.1, R, p["d_count"]), report.kappa_uniform)
    if lv.covered:
        rep.check("centered ball beats every off-center competitor", lv.centered_wins)
        rep.extra_tables["competitors.csv"] = (
            ["d", "rho", "energy", "centered_energy"],
            [(c.d, c.rho, c.energy, lv.centered_energy) for c in lv.competitors],
        )
    else:
        rep.notes.append(f"R = {R:g} is below r* = {cert.r_star:.6g}: not covered by the certificate")


EXPERIMENTS = {
    "profile": (_profile, ["r", "volume", "energy", "dE_dv", "d2E_dv2", "fd_dE_dv", "fd_d2E_dv2", "consistent"], ["volume", "energy"]),
    "one-dim": (_one_dim, ["v", "intervals", "left", "right", "best_energy", "centered_energy", "gap"], ["v", "best_energy", "centered_energy"]),
    "curve-sweep": (_curve_sweep, ["k0", "k0_times_R_star", "position_error", "angle_error", "termination"], ["k0", "position_error", "angle_error"]),
    "fuglede": (_fuglede, ["trial", "u_l2", "u_w1inf", "gap", "lower_bound", "ratio"], ["trial", "gap", "lower_bound"]),
    "symmetrize": (_symmetrize, ["trial", "volume", "volume_sym", "potential", "potential_sym", "perimeter", "perimeter_sym"], ["trial", "perimeter", "perimeter_sym"]),
    "counterexample-1": (_counterexample_1, ["ball", "d", "radius", "volume", "energy"], []),
    "counterexample-2": (_counterexample_2, ["eps", "centered_energy", "offcenter_energy", "gap", "gap_over_eps", "target"], ["eps", "gap_over_eps", "target"]),
    "calibrate": (_calibrate, ["r", "ell", "h", "h_prime"], ["r", "h", "h_prime"]),
}


def _write_outputs(cfg: ExperimentConfig, rep: Report, failure: str | None) -> int:
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "report.csv", rep.header, rep.rows)
    for name, (header, rows) in rep.extra_tables.items():
        _write_csv(out / name, header, rows)
    lines = [f"experiment: {cfg.experiment}", f"n: {cfg.n}", f"seed: {cfg.seed}"]
    lines += [f"{label}: {'PASS' if ok else 'FAIL'}" for label, ok in rep.checks]
    lines += [f"note: {n}" for n in rep.notes]
    if failure is not None:
        lines.append(f"FAILED: {failure}")
        code = EXIT_NUMERIC
    else:
        code = EXIT_OK if all(ok for _, ok in rep.checks) else EXIT_ASSERT
        lines.append("status: " + ("OK" if code == EXIT_OK else "FAILED"))
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    if cfg.plot and rep.plot_columns and rep.rows and failure is None:
        try:
            plot(out / "report.csv", rep.plot_columns, out / "plot.svg")
        except PlotError as exc:
            print(f"plot skipped: {exc}", file=sys.stderr)
    return code


def run(cfg: ExperimentConfig) -> int:
    runner, header, cols = EXPERIMENTS[cfg.experiment]
    rep = Report(header, plot_columns=cols)
    failure = None
    try:
        runner(cfg, rep, SplitMix64(cfg.seed))
    except (IsoperiError, ArithmeticError, FloatingPointError) as exc:
        failure = f"{type(exc).__name__}: {exc}"
    code = _write_outputs(cfg, rep, failure)
    for label, ok in rep.checks:
        print(f"{label}: {'PASS' if ok else 'FAIL'}")
    if failure:
        print(f"FAILED: {failure}", file=sys.stderr)
    return code


def validate(text: str, base_dir: Path | None = None) -> list[str]:
    return parse(text, base_dir)[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="isoperi", description="Weighted isoperimetric experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_plot = sub.add_parser("plot", help="line chart of CSV columns (first is x)")
    p_plot.add_argument("csv")
    p_plot.add_argument("columns", help="comma-separated column names")
    p_plot.add_argument("-o", "--output")
    args = ap.parse_args(argv)

    if args.command == "plot":
        try:
            path = plot(args.csv, [c.strip() for c in args.columns.split(",")], args.output)
        except (PlotError, OSError) as exc:
            print(f"plot error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(path)
        return EXIT_OK

    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cfg, issues = parse(text, path.parent)
    if issues:
        for issue in issues:
            print(issue, file=sys.stderr if args.command == "run" else sys.stdout)
        return EXIT_CONFIG
    if args.command == "validate":
        print("config ok")
        return EXIT_OK
    try:
        return run(cfg)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
