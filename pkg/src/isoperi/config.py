"""Experiment configuration: bracketed sections of key = value lines.

    [experiment]
    kind = fuglede
    n = 2
    seed = 7
    output = runs/fuglede
    weights_file = pair.ini      ; or inline [psi] / [g] sections

    [psi]
    kind = gaussian
    a = 0.5

    [params]
    trials = 100
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, InfeasibleConstructionError
from .weights import WeightPair, check_g_monotone_parameters, profile_from_params

EXPERIMENTS = (
    "profile",
    "one-dim",
    "curve-sweep",
    "fuglede",
    "symmetrize",
    "counterexample-1",
    "counterexample-2",
    "calibrate",
)
BUILT_IN_WEIGHTS = ("counterexample-1", "counterexample-2")

# name -> (type, lower, upper, default); bounds are inclusive, None = open
_P = {
    "profile": {
        "r_min": (float, 1e-6, None, 0.05),
        "r_max": (float, 1e-6, None, 3.0),
        "points": (int, 2, 10_000, 40),
    },
    "one-dim": {
        "v_min": (float, 1e-6, None, 0.1),
        "v_max": (float, 1e-6, None, 2.0),
        "count": (int, 1, 1000, 5),
        "max_intervals": (int, 1, 3, 1),
        "grid_points": (int, 20, 2000, 200),
    },
    "curve-sweep": {
        "R_star": (float, 1e-3, 1e3, 1.0),
        "k_min": (float, 1e-6, None, 0.8),
        "k_max": (float, 1e-6, None, 1.2),
        "count": (int, 1, 1000, 9),
    },
    "fuglede": {
        "R": (float, 1e-3, 1e3, 1.0),
        "trials": (int, 1, 100_000, 100),
        "resolution": (int, 8, 512, 64),
        "degree": (int, 1, 255, 8),
        "amplitude": (float, 1e-12, 0.5, 0.002),
        "eps": (float, 1e-12, 0.5, 0.01),
        "c_factor": (float, 0.0, 1.0, 0.4),
    },
    "symmetrize": {
        "trials": (int, 1, 100_000, 200),
        "shells": (int, 1, 100, 4),
        "max_intervals": (int, 1, 20, 3),
        "r_max": (float, 1e-6, None, 2.0),
    },
    "counterexample-1": {
        "M": (float, 1e-9, None, 1.0),
        "L": (float, 1e-9, None, 1.0),
        "L_prime": (float, 1e-9, None, None),
        "L_second": (float, 1e-9, None, 5.0),
        "eps": (float, 1e-12, None, 0.04),
        "h": (float, 1e-9, None, 3.0),
        "delta": (float, 0.0, None, 1e-3),
        "v": (float, 1e-12, None, 1.0),
    },
    "counterexample-2": {
        "eps_list": (list, 1e-6, 0.1, (0.05, 0.02, 0.01)),
        "R": (float, 1e-6, 0.999, 0.5),
        "g0": (float, 1e-9, None, 10.0),
        "tolerance": (float, 0.0, 1.0, 0.15),
    },
    "calibrate": {
        "R": (float, 1e-6, None, None),
        "d_count": (int, 1, 1000, 10),
        "samples": (int, 100, 10_000_000, 10_000),
    },
}
_DIMENSIONS = {"one-dim": (1,), "fuglede": (2, 3), "symmetrize": (2, 3), "calibrate": (2, 3),
               "counterexample-1": (2, 3), "counterexample-2": (2, 3), "curve-sweep": (2, 3)}
_EXPERIMENT_KEYS = {"kind", "n", "seed", "output", "weights_file", "plot"}
_PROFILE_KEYS = {
    "polynomial": {"kind", "coefficients", "trig"},
    "gaussian": {"kind", "a"},
    "spline": {"kind", "knots", "values", "slope_start", "slope_end"},
    "piecewise": {"kind", "breaks", "coefficients"},
}


@dataclass
class ExperimentConfig:
    experiment: str
    n: int
    seed: int
    output: Path
    params: dict
    pair: WeightPair | None = None
    plot: bool = True
    source: str = field(default="", repr=False)


def _parse_number(kind, raw: str):
    if kind is int:
        return int(raw.strip())
    if kind is list:
        vals = tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite entry")
        return vals
    val = float(raw)
    if not math.isfinite(val):
        raise ValueError("non-finite value")
    return val


def _in_range(val, lo, hi) -> bool:
    vals = val if isinstance(val, tuple) else (val,)
    return all((lo is None or v >= lo) and (hi is None or v <= hi) for v in vals)


def _profile_issues(section: str, params: dict) -> list[str]:
    kind = params.get("kind", "").strip()
    if kind not in _PROFILE_KEYS:
        return [f"{section}.kind: unknown profile kind {kind!r}"]
    return [f"{section}.{k}: unknown key" for k in params if k not in _PROFILE_KEYS[kind]]


def _read(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    cp.read_string(text)
    return cp


def parse(text: str, base_dir: Path | None = None) -> tuple[ExperimentConfig | None, list[str]]:
    """Parse and validate; returns (config or None, issues)."""
    base_dir = base_dir or Path.cwd()
    issues: list[str] = []
    try:
        cp = _read(text)
    except configparser.Error as exc:
        return None, [f"syntax: {exc}"]
    known = {"experiment", "psi", "g", "params"}
    issues += [f"[{s}]: unknown section" for s in cp.sections() if s not in known]
    if not cp.has_section("experiment"):
        return None, issues + ["experiment: required"]
    exp = dict(cp["experiment"])
    issues += [f"experiment.{k}: unknown key" for k in exp if k not in _EXPERIMENT_KEYS]
    kind = exp.get("kind", "").strip()
    if kind not in EXPERIMENTS:
        return None, issues + [f"experiment.kind: must be one of {', '.join(EXPERIMENTS)}"]

    n_default = 1 if kind == "one-dim" else 2
    try:
        n = int(exp.get("n", n_default))
        seed = int(exp.get("seed", "0"))
    except ValueError as exc:
        return None, issues + [f"experiment: {exc}"]
    if n not in _DIMENSIONS.get(kind, (2, 3)):
        issues.append(f"experiment.n: {kind} supports n in {_DIMENSIONS.get(kind, (2, 3))}")
    if not 0 <= seed < 2**64:
        issues.append("experiment.seed: must lie in [0, 2^64)")
    plot = exp.get("plot", "true").strip().lower() in ("1", "true", "yes", "on")

    schema = _P[kind]
    params = {}
    raw_params = dict(cp["params"]) if cp.has_section("params") else {}
    for key, raw in raw_params.items():
        if key not in schema:
            issues.append(f"params.{key}: unknown key")
            continue
        typ, lo, hi, _ = schema[key]
        try:
            val = _parse_number(typ, raw)
        except ValueError:
            issues.append(f"params.{key}: not a valid {typ.__name__}")
            continue
        if not _in_range(val, lo, hi):
            issues.append(f"params.{key}: {raw.strip()} outside [{lo}, {hi}]")
        params[key] = val
    for key, (_, _, _, default) in schema.items():
        params.setdefault(key, default)

    pair = None
    if kind not in BUILT_IN_WEIGHTS:
        pair, more = _weights(cp, exp, n, base_dir)
        issues += more
    issues += _semantic_issues(kind, n, params)
    if issues:
        return None, issues
    out = Path(exp.get("output", "out"))
    return ExperimentConfig(kind, n, seed, out, params, pair, plot, text), []


def _weights(cp, exp, n, base_dir) -> tuple[WeightPair | None, list[str]]:
    if "weights_file" in exp:
        path = Path(exp["weights_file"])
        if not path.is_absolute():
            path = base_dir / path
        try:
            text = path.read_text()
            pair = WeightPair.from_text(text)
        except (OSError, KeyError, ValueError, configparser.Error) as exc:
            return None, [f"weights_file: {exc}"]
        return pair.with_dimension(n), []
    if not cp.has_section("psi"):
        return None, ["weights: required"]
    issues = _profile_issues("psi", dict(cp["psi"]))
    g_params = dict(cp["g"]) if cp.has_section("g") else {"kind": "polynomial", "coefficients": "0"}
    issues += _profile_issues("g", g_params)
    if issues:
        return None, issues
    try:
        return WeightPair(profile_from_params(dict(cp["psi"])), profile_from_params(g_params), n), []
    except (ValueError, KeyError) as exc:
        return None, [f"weights: {exc}"]


def _semantic_issues(kind: str, n: int, p: dict) -> list[str]:
    issues = []
    if kind == "profile" and not p["r_min"] < p["r_max"]:
        issues.append("params: need r_min < r_max")
    if kind == "one-dim" and not p["v_min"] <= p["v_max"]:
        issues.append("params: need v_min <= v_max")
    if kind == "curve-sweep" and not p["k_min"] <= p["k_max"]:
        issues.append("params: need k_min <= k_max")
    if kind == "fuglede" and p["amplitude"] >= p["eps"]:
        issues.append("params.amplitude: must be below eps")
    if kind == "counterexample-1":
        try:
            L_prime = p["L_prime"] if p["L_prime"] is not None else p["L"] + p["h"]
            check_g_monotone_parameters(
                p["M"], p["L"], L_prime, p["L_second"], p["eps"], p["h"], p["delta"], p["v"], n
            )
        except InfeasibleConstructionError as exc:
            issues.append(f"construction infeasible: {exc.inequality}")
    if kind == "counterexample-2":
        top = 20 * max(p["eps_list"])
        if p["g0"] <= top:
            issues.append(f"params.g0: must exceed 20 * max(eps) = {top:g}")
    return issues


def load(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    cfg, issues = parse(path.read_text(), path.parent)
    if issues:
        raise ConfigError(issues)
    return cfg
