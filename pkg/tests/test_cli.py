import csv
import shutil
from pathlib import Path

import numpy as np
import pytest

from isoperi import cli, config
from isoperi.errors import ConfigError
from isoperi.rng import SplitMix64
from isoperi.svgplot import PlotError, plot

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

GAUSS_FUGLEDE = """
[experiment]
kind = fuglede
n = 2
seed = 9
output = out

[psi]
kind = gaussian
a = 0.5

[params]
trials = 100
"""


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


# --- rng ---------------------------------------------------------------------


def test_splitmix_reference_vectors():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF
    r = SplitMix64(1234567)
    assert [r.next_u64() for _ in range(3)] == [6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_splitmix_helpers():
    r = SplitMix64(42)
    x = r.uniform(-1, 1, size=(3, 4))
    assert x.shape == (3, 4) and np.all((x >= -1) & (x < 1))
    ints = [r.integers(3, 7) for _ in range(200)]
    assert set(ints) == {3, 4, 5, 6}
    with pytest.raises(ValueError):
        r.integers(2, 2)
    a, b = SplitMix64(5).spawn(), SplitMix64(5).spawn()
    assert a.next_u64() == b.next_u64()


# --- config ------------------------------------------------------------------


def test_valid_config_has_no_issues():
    assert cli.validate(GAUSS_FUGLEDE) == []


def test_missing_weights():
    text = GAUSS_FUGLEDE.replace("[psi]\nkind = gaussian\na = 0.5\n", "")
    assert "weights: required" in cli.validate(text)


def test_unknown_keys_and_ranges():
    issues = cli.validate(GAUSS_FUGLEDE + "bogus = 1\nresolution = 2\n")
    assert "params.bogus: unknown key" in issues
    assert any(i.startswith("params.resolution") for i in issues)
    assert any("unknown section" in i for i in cli.validate(GAUSS_FUGLEDE + "[extra]\nx = 1\n"))
    assert cli.validate("[experiment]\nkind = nope\n")


def test_infeasible_counterexample_config():
    text = "[experiment]\nkind = counterexample-1\n[params]\neps = 0.1\n"
    issues = cli.validate(text)
    assert any("construction infeasible" in i and "eps^(n-1)" in i for i in issues)


def test_weights_file_relative_to_config(tmp_path):
    from isoperi.weights import WeightPair, gaussian, polynomial

    (tmp_path / "pair.ini").write_text(WeightPair(gaussian(), polynomial(0.5), 2).to_text())
    cfg_path = tmp_path / "c.ini"
    cfg_path.write_text("[experiment]\nkind = profile\nweights_file = pair.ini\n")
    cfg = config.load(cfg_path)
    assert cfg.pair.g(1.0) == 0.5
    (tmp_path / "bad.ini").write_text("[experiment]\nkind = profile\n")
    with pytest.raises(ConfigError):
        config.load(tmp_path / "bad.ini")


# --- run ---------------------------------------------------------------------


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_fuglede_run_is_deterministic(workdir):
    (workdir / "f.ini").write_text(GAUSS_FUGLEDE)
    assert cli.main(["run", "f.ini"]) == 0
    first = (workdir / "out" / "report.csv").read_bytes()
    rows = _rows(workdir / "out" / "report.csv")
    assert rows[0][:6] == ["trial", "u_l2", "u_w1inf", "gap", "lower_bound", "ratio"]
    assert len(rows) == 101
    assert cli.main(["run", "f.ini"]) == 0
    assert (workdir / "out" / "report.csv").read_bytes() == first
    assert (workdir / "out" / "plot.svg").read_text().startswith("<svg")


def test_counterexample_one_summary(workdir):
    shutil.copy(CONFIGS / "counterexample1.ini", workdir)
    assert cli.main(["run", "counterexample1.ini"]) == 0
    summary = next((workdir / "runs").rglob("summary.txt")).read_text()
    assert "E(B')−E(B) < 0: PASS" in summary
    assert "status: OK" in summary


def test_invalid_config_exit_code(workdir, capsys):
    (workdir / "bad.ini").write_text("[experiment]\nkind = counterexample-1\n[params]\neps = 0.1\n")
    assert cli.main(["run", "bad.ini"]) == 2
    assert "eps^(n-1)" in capsys.readouterr().err
    assert cli.main(["run", "missing.ini"]) == 2


def test_failed_assertion_exit_code(workdir):
    # counterexample-2 with an impossible tolerance fails its convergence check
    (workdir / "c2.ini").write_text(
        "[experiment]\nkind = counterexample-2\noutput = c2\n[params]\neps_list = 0.05\ntolerance = 0\n"
    )
    assert cli.main(["run", "c2.ini"]) == 1
    assert "status: FAILED" in (workdir / "c2" / "summary.txt").read_text()


def test_numeric_failure_exit_code(workdir):
    # a flat pair fails the stability conditions, which surfaces as a numeric failure
    text = GAUSS_FUGLEDE.replace("a = 0.5", "a = 0.0").replace("trials = 100", "trials = 2")
    (workdir / "z.ini").write_text(text)
    assert cli.main(["run", "z.ini"]) == 3
    assert "FAILED:" in (workdir / "out" / "summary.txt").read_text()


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.ini")))
def test_shipped_configs_validate(name):
    assert cli.validate((CONFIGS / name).read_text(), CONFIGS) == []


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.ini")))
def test_shipped_configs_run(name, workdir):
    shutil.copy(CONFIGS / name, workdir)
    assert cli.main(["run", name]) == 0


def test_threads_env(monkeypatch):
    monkeypatch.setenv("ISOPERI_THREADS", "3")
    assert cli._threads() == 3
    assert cli._map(lambda x: x * x, [1, 2, 3]) == [1, 4, 9]
    monkeypatch.setenv("ISOPERI_THREADS", "junk")
    assert cli._threads() == 1


def test_float_format():
    assert cli._fmt(0.1) == "0.10000000000000001"
    assert cli._fmt(True) == "true" and cli._fmt(3) == "3"


# --- plot --------------------------------------------------------------------


def test_plot_subcommand(workdir):
    (workdir / "p.csv").write_text("r,energy,other\n1,2,3\n2,3,1\n3,5,0\n")
    assert cli.main(["plot", "p.csv", "r,energy"]) == 0
    svg = (workdir / "p.svg").read_text()
    assert "<polyline" in svg and ">energy<" in svg and ">r<" in svg
    assert cli.main(["plot", "p.csv", "r,nope"]) == 2
    with pytest.raises(PlotError):
        plot(workdir / "p.csv", ["r"])


def test_profile_plot_is_monotone(workdir):
    shutil.copy(CONFIGS / "profile.ini", workdir)
    assert cli.main(["run", "profile.ini"]) == 0
    report = next((workdir / "runs").rglob("report.csv"))
    rows = _rows(report)
    col = rows[0].index("energy")
    energies = [float(r[col]) for r in rows[1:]]
    assert all(b > a for a, b in zip(energies, energies[1:]))
    assert (report.parent / "plot.svg").exists()
