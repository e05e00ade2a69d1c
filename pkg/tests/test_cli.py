import csv
import hashlib
import json
import math
import os

import numpy as np
import pytest

from paramp import config as cfgmod
from paramp.cli import main
from paramp.errors import ConfigError


def write(path, text):
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(*argv):
    return main([str(a) for a in argv])


SMALL_SCATTER = """\
task: scatter
drive:
  pump_by: gain_db
  pump_values: [20.0]
  signal_detuning_hz: {start: -1.0e8, stop: 1.0e8, points: 5}
"""


def test_print_config_round_trip(tmp_path, capsys):
    cfg = write(tmp_path / "a.yaml", SMALL_SCATTER)
    assert run("scatter", "--config", cfg, "--print-config") == 0
    first = capsys.readouterr().out
    again = write(tmp_path / "b.yaml", first)
    assert run("scatter", "--config", again, "--print-config") == 0
    assert capsys.readouterr().out == first
    # the round-tripped file drives the same computation, byte for byte
    assert run("scatter", "--config", cfg, "--out", tmp_path / "o1") == 0
    assert run("scatter", "--config", again, "--out", tmp_path / "o2") == 0
    for name in ("scatter.csv", "manifest.json", "config.resolved.yaml"):
        assert (tmp_path / "o1" / name).read_bytes() == (tmp_path / "o2" / name).read_bytes()


def test_scatter_output(tmp_path):
    cfg = write(tmp_path / "a.yaml", SMALL_SCATTER)
    assert run("scatter", "--config", cfg, "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o" / "scatter.csv")
    assert len(rows) == 5
    centre = rows[2]
    assert float(centre["detuning_hz"]) == 0.0
    assert float(centre["gain_ss_db"]) == pytest.approx(20.0, abs=1e-9)
    for r in rows:
        assert float(r["abs_det"]) == pytest.approx(1.0, abs=1e-10)
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    for name, digest in manifest["files"].items():
        assert hashlib.sha256((tmp_path / "o" / name).read_bytes()).hexdigest() == digest
    assert manifest["failures"] == 0 and manifest["task"] == "scatter"


def test_unknown_key_reports_line(tmp_path, capsys):
    cfg = write(tmp_path / "a.yaml", "task: scatter\nmodel:\n  bogus: 1\n")
    assert run("scatter", "--config", cfg, "--out", tmp_path / "o") == 2
    err = capsys.readouterr().err
    assert "line 3" in err and "model.bogus" in err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize(
    "text",
    [
        "model:\n  signal_kappa_hz: -5\n",
        "model:\n  topology: triangular\n",
        "drive:\n  signal_power_dbm: {start: 0, stop: 1}\n",
        "seed: [1, 2]\n",
        "model:\n  signal_kappa_hz: 1\n  signal_kappa_hz: 2\n",
        "task: mc\n",
    ],
)
def test_config_errors_exit_2(tmp_path, text):
    cfg = write(tmp_path / "a.yaml", text)
    assert run("scatter", "--config", cfg, "--out", tmp_path / "o") == 2


def test_config_error_carries_line():
    with pytest.raises(ConfigError) as info:
        cfgmod.loads("task: scatter\nnumerics:\n  depletion:\n    tol: fast\n")
    assert info.value.line == 4


def test_numeric_strings_accepted():
    cfg = cfgmod.loads("numerics:\n  depletion:\n    tol: 1e-12\n")
    assert cfg["numerics"]["depletion"]["tol"] == 1e-12


def test_io_errors_exit_4(tmp_path):
    assert run("scatter", "--config", tmp_path / "missing.yaml", "--out", tmp_path / "o") == 4
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write(tmp_path / "a.yaml", SMALL_SCATTER)
    assert run("scatter", "--config", cfg, "--out", blocker / "sub") == 4


def test_out_required(tmp_path):
    assert run("scatter") == 2


def test_solver_failure_exit_3_with_partial_output(tmp_path):
    cfg = write(
        tmp_path / "a.yaml",
        "drive:\n  pump_by: rho0\n  pump_values: [0.5, 1.2]\n"
        "  signal_power_dbm: {start: -140, stop: -120, points: 3}\n",
    )
    assert run("pout-sweep", "--config", cfg, "--out", tmp_path / "o") == 3
    good = read_csv(tmp_path / "o" / "pout_curve_rho0_0.5.csv")
    bad = read_csv(tmp_path / "o" / "pout_curve_rho0_1.2.csv")
    assert all(r["error"] == "" for r in good)
    assert all(r["error"] == "AboveThreshold" for r in bad)
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["failures"] > 0


def test_pump_off_is_unity(tmp_path):
    cfg = write(tmp_path / "a.yaml", "drive:\n  pump_values: [10]\n  signal_power_dbm: [-150, -100, -60]\n")
    assert run("pout-sweep", "--config", cfg, "--out", tmp_path / "o") == 0
    for r in read_csv(tmp_path / "o" / "pout_pump_off.csv"):
        assert float(r["p_out_dbm"]) == float(r["p_in_dbm"])
    # pumped curve: output above input by about the gain at small signal
    rows = read_csv(tmp_path / "o" / "pout_curve_gain_db_10.csv")
    assert float(rows[1]["p_out_dbm"]) - float(rows[1]["p_in_dbm"]) == pytest.approx(10.0, abs=0.1)


def test_gain_sweep_compression_slope(tmp_path):
    assert run("gain-sweep", "--out", tmp_path / "o") == 0
    fit = read_csv(tmp_path / "o" / "compression_fit.csv")[0]
    assert -0.75 <= float(fit["slope_db_per_db"]) <= -0.62
    pts = read_csv(tmp_path / "o" / "compression_points.csv")
    assert len(pts) == 6


def test_seed_override_recorded(tmp_path):
    cfg = write(tmp_path / "a.yaml", SMALL_SCATTER)
    assert run("scatter", "--config", cfg, "--out", tmp_path / "o", "--seed", 17) == 0
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["seed"] == 17
    assert cfgmod.load(tmp_path / "o" / "config.resolved.yaml")["seed"] == 17


def test_threshold_sweep(tmp_path):
    cfg = write(
        tmp_path / "a.yaml",
        "model:\n  topology: degenerate\ndrive:\n  signal_power_dbm: [-120, -100]\n",
    )
    assert run("threshold-sweep", "--config", cfg, "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o" / "threshold.csv")
    assert rows[0]["p_in_dbm"] == "-inf"
    rho = [float(r["threshold_rho0"]) for r in rows]
    assert rho[0] == pytest.approx(1.0, rel=1e-3)
    assert all(b >= a for a, b in zip(rho, rho[1:]))


def test_wigner_and_mc(tmp_path):
    text = (
        "model:\n  topology: degenerate\n  pump_kappa_hz: 3.0e8\n"
        "drive:\n  pump_by: rho0\n  pump_values: [0.5]\n  signal_power_dbm: [-150]\n"
        "numerics:\n  wigner: {points: 41}\n  mc: {n_traj: 400, burn_in_kappa: 10, bins: 21}\n"
    )
    cfg = write(tmp_path / "a.yaml", text)
    assert run("wigner", "--config", cfg, "--out", tmp_path / "w") == 0
    dat = (tmp_path / "w" / "wigner_00_000_0.dat").read_text().splitlines()
    assert dat[0].startswith("# axis re_a ") and dat[0].endswith(" 41")
    W = np.loadtxt(tmp_path / "w" / "wigner_00_000_0.dat")
    assert W.shape == (41, 41)
    states = read_csv(tmp_path / "w" / "wigner_states.csv")
    # lab frame, real pump: Im a amplified with var 1/(4(1-0.5)), Re a squeezed
    assert float(states[0]["var_im_a_quanta"]) == pytest.approx(0.5, rel=1e-6)
    assert float(states[0]["var_re_a_quanta"]) == pytest.approx(1 / 6, rel=1e-6)

    assert run("mc", "--config", cfg, "--out", tmp_path / "m") == 0
    summary = read_csv(tmp_path / "m" / "mc_summary.csv")
    assert summary[0]["error"] == ""
    H = np.loadtxt(tmp_path / "m" / "mc_histogram_00_000.dat")
    assert H.shape == (21, 21)
    cmp_rows = read_csv(tmp_path / "m" / "mc_covariance.csv")
    assert cmp_rows and all(math.isfinite(float(r["z_score"])) for r in cmp_rows)
    # same seed, same bytes
    assert run("mc", "--config", cfg, "--out", tmp_path / "m2") == 0
    assert (tmp_path / "m" / "mc_summary.csv").read_bytes() == (tmp_path / "m2" / "mc_summary.csv").read_bytes()


def test_circuit_params(tmp_path):
    assert run("circuit-params", "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o" / "circuit_params.csv")
    circuits = {r["circuit"] for r in rows}
    assert circuits == {"duffing", "squid", "double_pump", "jrm"}
    squid = {r["quantity"]: float(r["value"]) for r in rows if r["circuit"] == "squid" and r["value"]}
    assert squid["g_aa_hz"] / squid["omega0_hz"] == pytest.approx(math.pi * 0.02 / 16, rel=1e-12)


def test_resolved_config_reloads(tmp_path):
    assert run("circuit-params", "--out", tmp_path / "o") == 0
    cfg = cfgmod.load(os.path.join(tmp_path, "o", "config.resolved.yaml"))
    assert cfg == cfgmod.loads(cfgmod.dumps(cfg))
