import csv
import hashlib
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from kvquant import cli
from kvquant.model import HBAR, TRAP_FREQUENCY, PROTON_MASS
from kvquant.validation import SuiteResult

Q = HBAR * TRAP_FREQUENCY


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=object)


def numeric(rows):
    return rows.astype(float)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_simulate_preset_first_row(tmp_path):
    assert cli.main(["simulate", "--preset", "paper-resonant", "--scheme", "K", "--t-end", "0.5",
                     "--out", str(tmp_path)]) == 0
    header, rows = read(tmp_path / "series.csv")
    assert header == ["t"] + [f"P{k}" for k in range(12)] + ["S", "E", "norm"]
    first = numeric(rows[0])
    assert first[1] == 1 and first[13] == 0
    assert first[14] == pytest.approx(Q / 2, rel=1e-15)
    assert numeric(rows[-1])[1] < 1
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "simulate" and man["diagnostics"]["scheme"] == "K-resonant"


def test_simulate_zero_drive_is_static(tmp_path):
    assert cli.main(["simulate", "--alpha", "0", "--out", str(tmp_path)]) == 0
    _, rows = read(tmp_path / "series.csv")
    data = numeric(rows)
    assert data.shape[0] == 31416
    np.testing.assert_allclose(data[:, 1:], np.broadcast_to(data[0, 1:], data[:, 1:].shape), atol=1e-12, rtol=1e-12)


def test_csv_formatting_is_17_digits_and_plain():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(-0.0) == "0"
    assert cli.fmt(1e-25) == "1e-25"
    assert cli.fmt(1 / 3) == "0.33333333333333331"
    assert float(cli.fmt(math.pi)) == math.pi


def test_simulate_is_byte_identical_and_replayable(tmp_path):
    args = ["simulate", "--scheme", "H", "--case", "nonresonant", "--alpha", "1e-15", "--n-states", "6",
            "--t-end", "20"]
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert cli.main(["simulate", "--config", str(a / "manifest.json"), "--out", str(c)]) == 0
    assert digest(a / "series.csv") == digest(b / "series.csv") == digest(c / "series.csv")
    assert digest(a / "manifest.json") == digest(c / "manifest.json")


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"alpha": 1e-15, "n_states": 5, "t_end": 3.0, "scheme": "H"}))
    assert cli.main(["simulate", "--config", str(cfg), "--n-states", "4", "--out", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())["scenario"]
    assert man["n_states"] == 4 and man["params"]["drive_amplitude"] == 1e-15 and man["scheme"] == "H"
    header, _ = read(tmp_path / "series.csv")
    assert header[-4] == "P3"


def test_physical_flags_reach_the_manifest(tmp_path):
    assert cli.main(["simulate", "--alpha", "0", "--mass", "2e-27", "--omega0", "1e9", "--phi", "0.5",
                     "--t-end", "1", "--dt", "0.01", "--stride", "5", "--out", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())["scenario"]
    assert m["params"] == {"mass": 2e-27, "natural_frequency": 1e9, "drive_frequency": 1e9, "drive_phase": 0.5,
                           "drive_amplitude": 0.0, "hbar": HBAR}
    assert (m["dt"], m["stride"], m["t_end"]) == (0.01, 5, 1.0)


def test_nonresonant_case_defaults_to_half_frequency(tmp_path):
    assert cli.main(["simulate", "--case", "nonresonant", "--alpha", "0", "--t-end", "1", "--out", str(tmp_path)]) == 0
    p = json.loads((tmp_path / "manifest.json").read_text())["scenario"]["params"]
    assert p["drive_frequency"] == 0.5 * p["natural_frequency"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--n-states", "1"],
    ["simulate", "--alpha", "-1"],
    ["simulate", "--mass", "0"],
    ["simulate", "--case", "resonant", "--omega", "1e9"],
    ["simulate", "--case", "nonresonant", "--omega", str(2 * math.pi * 1e9)],
    ["simulate", "--t-end", "-1"],
    ["simulate", "--dt", "auto"],  # would need ~1e10 steps with the scalar phase kept
])
def test_config_errors_exit_1(tmp_path, argv, capsys):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_exits_1(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"alpah": 1}))
    assert cli.main(["simulate", "--config", str(cfg)]) == 1
    assert "alpah" in capsys.readouterr().err


def test_numerical_abort_exits_2(tmp_path, capsys):
    assert cli.main(["simulate", "--out", str(tmp_path)]) == 2
    assert "norm drift" in capsys.readouterr().err


def test_sweep_csv(tmp_path):
    common = ["sweep", "--preset", "paper-resonant", "--t-end", "0.5", "--n-states", "6"]
    assert cli.main(common + ["--alphas", "2e-15,0,1e-15", "--out", str(tmp_path / "a")]) == 0
    assert cli.main(common + ["--alphas", "1e-15,2e-15,0", "--out", str(tmp_path / "b")]) == 0
    header, rows = read(tmp_path / "a" / "sweep.csv")
    assert header == ["alpha", "S_bar_K", "S_bar_H", "E_bar_K", "E_bar_H"]
    data = numeric(rows)
    assert list(data[:, 0]) == [0.0, 1e-15, 2e-15]
    assert data[0, 1] == 0 and data[0, 2] == 0
    assert digest(tmp_path / "a" / "sweep.csv") == digest(tmp_path / "b" / "sweep.csv")


def test_sweep_failures_get_error_column(tmp_path):
    assert cli.main(["sweep", "--alphas", "0,1e-13", "--t-end", "6.283185307179586", "--out", str(tmp_path)]) == 2
    header, rows = read(tmp_path / "sweep.csv")
    assert header[-1] == "error"
    assert rows[0][-1] == "" and "NormDriftError" in rows[1][-1]


def test_sweep_bad_grid_exits_1(tmp_path):
    assert cli.main(["sweep", "--alphas", "1e-15,abc", "--out", str(tmp_path)]) == 1
    assert cli.main(["sweep", "--alphas=-1e-15", "--out", str(tmp_path)]) == 1


def test_validate_passes_and_reports(tmp_path, capsys):
    assert cli.main(["validate", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "oracle-equivalence[H]" in out and "FAIL" not in out
    report = json.loads((tmp_path / "validation.json").read_text())
    assert all(r["passed"] for r in report) and len(report) == 21


def test_validate_zero_drive_config(capsys):
    assert cli.main(["validate", "--alpha", "0"]) == 0
    assert "[PASS] stationarity[H]" in capsys.readouterr().out


def test_validate_failure_exits_3(monkeypatch):
    monkeypatch.setattr(cli, "run_all", lambda base, seed: [SuiteResult("planted", False, 1.0, 0.0)])
    assert cli.main(["validate"]) == 3


def test_classical_zero_drive(tmp_path):
    assert cli.main(["classical", "--alpha", "0", "--out", str(tmp_path)]) == 0
    header, rows = read(tmp_path / "classical.csv")
    assert header == ["t", "x", "v", "K", "W"]
    t, x, v, K, W = numeric(rows).T
    assert np.max(np.abs(K - K[0])) <= 1e-12 * K[0]
    assert np.all(W == 0)


def test_classical_resonant_growth_and_decomposition(tmp_path):
    assert cli.main(["classical", "--x0", "0", "--t-end", "200", "--dt", "0.01", "--stride", "1",
                     "--out", str(tmp_path)]) == 0
    t, x, v, K, W = numeric(read(tmp_path / "classical.csv")[1]).T
    K0 = 0.5 * PROTON_MASS * v**2 + 0.5 * PROTON_MASS * TRAP_FREQUENCY**2 * x**2
    np.testing.assert_allclose(W, K - K0, rtol=0, atol=1e-12 * np.max(K0))
    # per-period envelope grows linearly with slope alpha / (2 m w0)
    period = 628
    env = np.array([np.max(np.abs(x[i:i + period])) for i in range(0, 20000 - period, period)])
    mids = np.array([t[i + period // 2] for i in range(0, 20000 - period, period)])
    slope = np.polyfit(mids, env, 1)[0]
    assert slope == pytest.approx(1e-13 / (2 * PROTON_MASS * TRAP_FREQUENCY), rel=0.02)


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "kvquant", "classical", "--alpha", "0", "--t-end", "1",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "classical.csv").exists()
