"""End-to-end command line tests through subprocess: CSV and JSON
contracts, exit codes, determinism of written artifacts."""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ocrate import binary_entropy, c0_bsc

HAMMING_ROWS = [[0.0, 1.0], [1.0, 0.0]]
BSC25_ROWS = [[0.75, 0.25], [0.25, 0.75]]
IDENTITY_ROWS = [[1.0, 0.0], [0.0, 1.0]]


def run_cli(*argv):
    return subprocess.run([sys.executable, "-m", "ocrate.cli", *argv],
                          capture_output=True, text=True)


def parse_csv(text):
    lines = text.strip().split("\n")
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_usage_paths_exit_with_validation_code():
    proc = run_cli()
    assert proc.returncode == 1
    assert "usage" in proc.stderr.lower()
    proc = run_cli("region-bsc", "--bogus")
    assert proc.returncode == 1
    proc = run_cli("no-such-command")
    assert proc.returncode == 1


def test_region_bsc_anchors_and_shape():
    """Default grid: 41 rows from rc = 0 up to the entropy of the
    distortion, rate 0.3991 at the left end and the one-bit complement
    of the entropy on the plateau."""
    proc = run_cli("region-bsc", "--d", "0.25")
    assert proc.returncode == 0
    header, rows = parse_csv(proc.stdout)
    assert header == ["rc", "r_min"]
    assert len(rows) == 41
    rc = np.array([float(r[0]) for r in rows])
    r_min = np.array([float(r[1]) for r in rows])
    assert rc[0] == 0.0
    assert abs(rc[-1] - binary_entropy(0.25)) <= 1e-5
    assert abs(r_min[0] - 0.3991) <= 5e-3
    assert abs(r_min[-1] - (1.0 - binary_entropy(0.25))) <= 1e-5
    assert np.all(np.diff(r_min) <= 1e-12)


def test_region_bsc_cells_use_six_significant_digits():
    proc = run_cli("region-bsc", "--d", "0.15", "--points", "7")
    header, rows = parse_csv(proc.stdout)
    for row in rows:
        for cell in row:
            assert cell == f"{float(cell):.6g}"


def test_region_bsc_domain_exit():
    assert run_cli("region-bsc", "--d", "0.6").returncode == 2
    assert run_cli("region-bsc", "--d", "0").returncode == 2
    assert run_cli("region-bsc", "--d", "0.2", "--points", "1").returncode == 1
    assert run_cli("region-bsc").returncode == 1


def test_region_gauss_curve_and_infinite_tail():
    proc = run_cli("region-gauss", "--sigma-x", "1.0", "--sigma-y", "1.0",
                   "--d", "0.8", "--points", "9")
    assert proc.returncode == 0
    header, rows = parse_csv(proc.stdout)
    assert header == ["rc", "r_min"]
    assert len(rows) == 10
    assert abs(float(rows[0][1]) - 0.6610) <= 2e-2
    assert rows[-1][0] == "inf"
    assert abs(float(rows[-1][1]) - math.log2(1.25)) <= 1e-5
    r_min = [float(r[1]) for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(r_min, r_min[1:]))


def test_region_gauss_loose_budget_costs_nothing():
    # distortion budget at the sum of the variances: independence is
    # already close enough, so every row is zero
    proc = run_cli("region-gauss", "--sigma-x", "1.0", "--sigma-y", "1.0",
                   "--d", "2.0", "--points", "5")
    assert proc.returncode == 0
    _, rows = parse_csv(proc.stdout)
    assert all(float(r[1]) == 0.0 for r in rows)
    assert rows[-1][0] == "inf"


def _assert_json_round_trip(text):
    payload = json.loads(text)
    assert json.dumps(payload, indent=2, sort_keys=True) + "\n" == text
    return payload


def test_wyner_json_contract():
    proc = run_cli("wyner", "--a0", "0.25")
    assert proc.returncode == 0
    payload = _assert_json_round_trip(proc.stdout)
    assert payload["status"] == "ok"
    assert payload["witness"] is None
    assert abs(payload["value_bits"] - 0.6095260510734206) <= 1e-9


def test_c0_matches_library():
    proc = run_cli("c0", "--d", "0.25")
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert abs(payload["value_bits"] - c0_bsc(0.25)) <= 1e-12


def test_mmi_json_and_witness(tmp_path):
    cfg = write_config(tmp_path, {"mu": [0.5, 0.5], "psi": [0.5, 0.5],
                                  "rho": HAMMING_ROWS, "d": 0.25})
    proc = run_cli("mmi", "--config", cfg)
    assert proc.returncode == 0
    payload = _assert_json_round_trip(proc.stdout)
    assert payload["status"] == "ok"
    assert abs(payload["value_bits"] - (1.0 - binary_entropy(0.25))) <= 1e-6
    table = np.array(payload["witness"])
    assert table.shape == (2, 2)
    assert abs(table.sum() - 1.0) <= 1e-9


def test_mmi_infeasible_payload(tmp_path):
    # marginals 0.8 apart in total variation cannot meet a 0.2 budget;
    # the payload reports it, the exit code stays 0
    cfg = write_config(tmp_path, {"mu": [0.9, 0.1], "psi": [0.1, 0.9],
                                  "rho": HAMMING_ROWS, "d": 0.2})
    proc = run_cli("mmi", "--config", cfg)
    assert proc.returncode == 0
    payload = _assert_json_round_trip(proc.stdout)
    assert payload == {"status": "infeasible", "value_bits": "inf",
                       "witness": None}


def test_mmi_config_validation(tmp_path):
    missing = write_config(tmp_path, {"mu": [0.5, 0.5]}, "missing.json")
    assert run_cli("mmi", "--config", missing).returncode == 1
    extra = write_config(tmp_path, {"mu": [0.5, 0.5], "psi": [0.5, 0.5],
                                    "rho": HAMMING_ROWS, "d": 0.25,
                                    "bogus": 1}, "extra.json")
    proc = run_cli("mmi", "--config", extra)
    assert proc.returncode == 1
    assert "bogus" in proc.stderr
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run_cli("mmi", "--config", str(broken)).returncode == 1
    assert run_cli("mmi").returncode == 1


def test_i0_reaches_known_value(tmp_path):
    cfg = write_config(tmp_path, {"mu": [0.5, 0.5], "psi": [0.5, 0.5],
                                  "rho": HAMMING_ROWS, "d": 0.25,
                                  "restarts": 8, "seed": 0})
    proc = run_cli("i0", "--config", cfg)
    assert proc.returncode == 0
    payload = _assert_json_round_trip(proc.stdout)
    assert payload["status"] == "ok"
    assert abs(payload["value_bits"] - 0.3991) <= 5e-3
    witness = payload["witness"]
    assert set(witness) == {"weights", "x_given_u", "y_given_u"}
    assert abs(sum(witness["weights"]) - 1.0) <= 1e-9


def test_det_decoder_with_infinite_shared_rate(tmp_path):
    base = {"mu": [0.5, 0.5], "psi": [0.5, 0.5], "rho": HAMMING_ROWS,
            "d": 0.25}
    unlimited = write_config(tmp_path, dict(base, rc="inf"), "inf.json")
    proc = run_cli("det-decoder", "--config", unlimited)
    assert proc.returncode == 0
    at_inf = json.loads(proc.stdout)["value_bits"]
    assert abs(at_inf - (1.0 - binary_entropy(0.25))) <= 1e-6
    starved = write_config(tmp_path, dict(base, rc=0.0), "zero.json")
    at_zero = json.loads(run_cli("det-decoder", "--config",
                                 starved).stdout)["value_bits"]
    assert at_zero >= at_inf - 1e-12


def test_empirical_and_synthesis_smoke(tmp_path):
    cfg = write_config(tmp_path, {"mu": [0.5, 0.5], "psi": [0.5, 0.5],
                                  "rho": HAMMING_ROWS, "d": 0.25})
    payload = json.loads(run_cli("empirical", "--config", cfg).stdout)
    assert payload["status"] == "ok" and payload["value_bits"] >= 0.0
    payload = json.loads(run_cli("synthesis-bsc", "--d", "0.25").stdout)
    assert payload["status"] == "ok" and payload["value_bits"] >= 0.0


def test_softcover_csv(tmp_path):
    cfg = write_config(tmp_path, {"weights": [0.5, 0.5],
                                  "channel": [[0.9, 0.1], [0.1, 0.9]],
                                  "r": 1.5, "n_values": [1, 2],
                                  "codebooks": 2})
    proc = run_cli("softcover", "--config", cfg)
    assert proc.returncode == 0
    header, rows = parse_csv(proc.stdout)
    assert header == ["n", "mean_tv"]
    assert [int(r[0]) for r in rows] == [1, 2]
    assert all(0.0 <= float(r[1]) <= 1.0 for r in rows)
    short = write_config(tmp_path, {"weights": [0.5, 0.5],
                                    "channel": [[0.9, 0.1], [0.1, 0.9]],
                                    "n_values": [1]}, "short.json")
    assert run_cli("softcover", "--config", short).returncode == 1


@pytest.fixture
def sim_config(tmp_path):
    payload = {"weights": [0.5, 0.5], "x_given_u": BSC25_ROWS,
               "y_given_u": IDENTITY_ROWS, "rho": HAMMING_ROWS,
               "n": 3, "r": 0.8, "rc": 0.5, "trials": 4, "seed": 0,
               "mode": "exact"}
    return payload, tmp_path


def test_simulate_writes_report_and_trials(sim_config):
    payload, tmp_path = sim_config
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "report.json"
    proc = run_cli("simulate", "--config", cfg, "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    report_text = out.read_text()
    report = _assert_json_round_trip(report_text)
    assert report["mode"] == "exact"
    assert report["tv_output_vs_iid"] <= 1e-12
    trials_path = tmp_path / "report.trials.csv"
    header, rows = parse_csv(trials_path.read_text())
    assert header == ["trial", "k", "j", "encoder_fallback", "distortion",
                      "correction_move", "corrected_distortion",
                      "triangle_ok"]
    assert len(rows) == 4
    assert [int(r[0]) for r in rows] == [0, 1, 2, 3]
    assert all(r[7] == "1" for r in rows)

    # byte-identical artifacts on a rerun with the same seed
    out2 = tmp_path / "again.json"
    assert run_cli("simulate", "--config", cfg,
                   "--out", str(out2)).returncode == 0
    assert out2.read_text() == report_text
    assert (tmp_path / "again.trials.csv").read_text() == \
        trials_path.read_text()


def test_simulate_requires_out(sim_config):
    payload, tmp_path = sim_config
    cfg = write_config(tmp_path, payload)
    assert run_cli("simulate", "--config", cfg).returncode == 1


def test_simulate_rejects_unknown_field(sim_config):
    payload, tmp_path = sim_config
    cfg = write_config(tmp_path, dict(payload, knob=1))
    out = tmp_path / "r.json"
    proc = run_cli("simulate", "--config", cfg, "--out", str(out))
    assert proc.returncode == 1
    assert "knob" in proc.stderr


def test_simulate_cap_exit(sim_config):
    payload, tmp_path = sim_config
    cfg = write_config(tmp_path, dict(payload, n=24, r=0.25))
    out = tmp_path / "r.json"
    proc = run_cli("simulate", "--config", cfg, "--out", str(out))
    assert proc.returncode == 3


def test_unwritable_out_path_is_validation(tmp_path):
    target = tmp_path / "no" / "such" / "dir" / "out.csv"
    proc = run_cli("region-bsc", "--d", "0.25", "--out", str(target))
    assert proc.returncode == 1


def test_out_flag_writes_stdout_content(tmp_path):
    target = tmp_path / "curve.csv"
    proc = run_cli("region-bsc", "--d", "0.25", "--points", "5",
                   "--out", str(target))
    assert proc.returncode == 0 and proc.stdout == ""
    direct = run_cli("region-bsc", "--d", "0.25", "--points", "5")
    assert target.read_text() == direct.stdout
