import csv
import io
import json
import subprocess
import sys

import pytest

from finmeas.cli import EXIT_DOMAIN, EXIT_IO, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main, parse_beta
from finmeas.oracle import brute_c_max
from finmeas.states import load_spectrum


@pytest.fixture
def nine(tmp_path):
    path = tmp_path / "nine.json"
    path.write_text(json.dumps({"energies": list(range(9)), "d_S": 3}))
    return path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_beta():
    assert parse_beta("inf") == float("inf")
    assert parse_beta("INF") == float("inf")
    assert parse_beta("0.5") == 0.5


def test_cmax_fig_point(capsys):
    code, out, _ = run(capsys, "cmax", "--N", "6", "--beta-ep", "0.0333333")
    data = json.loads(out)
    assert code == EXIT_OK
    assert 0 < data["c_max"] < 1 and data["delta"] < 1e-12


def test_cmax_inf(capsys):
    code, out, _ = run(capsys, "cmax", "--N", "1", "--beta-ep", "inf")
    assert code == EXIT_OK and json.loads(out)["c_max"] == 1.0


def test_cmax_spectrum_file(capsys, nine):
    code, out, _ = run(capsys, "cmax", "--spectrum", str(nine), "--beta-ep", "1.0")
    assert code == EXIT_OK
    assert json.loads(out)["c_max"] == pytest.approx(brute_c_max(load_spectrum(nine), 1.0), abs=1e-15)


def test_cmax_csv(capsys):
    code, out, _ = run(capsys, "cmax", "--N", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 1 and "closed_form" in rows[0]


def test_rank_error_exit(capsys):
    code, _, err = run(capsys, "cmax", "--N", "3", "--ds", "3")
    assert code == EXIT_DOMAIN and "RankError" in err


def test_parse_errors_exit_2(capsys):
    for argv in (["cmax", "--beta-ep", "-1"], ["cmax", "--beta-ep", "hot"], ["nope"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_USAGE
    capsys.readouterr()


def test_missing_pointer_is_usage_error(capsys):
    code, _, err = run(capsys, "build")
    assert code == EXIT_USAGE and "--N" in err


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == EXIT_OK
    assert out.strip().endswith("6/6 cases passed")


def test_verify_with_loose_tolerance_flags_failure(capsys, monkeypatch):
    monkeypatch.setenv("FINMEAS_TOL", "1.0")
    code, out, _ = run(capsys, "verify")
    assert code == EXIT_MISMATCH and "failing:" in out


def test_bad_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("FINMEAS_TOL", "abc")
    code, _, _ = run(capsys, "verify")
    assert code == EXIT_USAGE


def test_build_json(capsys):
    code, out, _ = run(capsys, "build", "--N", "3", "--beta-ep", "1.0")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["properties"]["unbiased"] is True
    assert data["partition"] == [[0, 2, 4, 6], [1, 3, 5, 7]]
    assert abs(data["dE_II"] - data["dE_II_analytic"]) < 1e-12


def test_build_general(capsys, nine):
    code, out, _ = run(capsys, "build", "--spectrum", str(nine), "--beta-ep", "0.5", "--rho", "0.2,0.3,0.5")
    data = json.loads(out)
    assert code == EXIT_OK and data["d_S"] == 3 and data["pairing_pi"][1] == [1, 0, 2]
    assert data["system_energies"] == [0.0, 8.0, 16.0]


def test_oracle_check_cases(capsys, nine):
    code, out, _ = run(capsys, "oracle-check", "--N", "3", "--beta-ep", "1.0")
    assert code == EXIT_OK and json.loads(out)["match"]
    code, out, _ = run(capsys, "oracle-check", "--ds", "3", "--spectrum", str(nine), "--beta-ep", "0.5")
    assert code == EXIT_OK and json.loads(out)["match"]
    code, out, _ = run(capsys, "oracle-check", "--N", "1", "--beta-ep", "inf")
    data = json.loads(out)
    assert code == EXIT_OK and data["oracle_dE_II"] == data["construction_dE_II"] == 0.5


def test_oracle_check_mismatch_exit(capsys):
    code, out, _ = run(capsys, "oracle-check", "--N", "3", "--rho", "0.7,0.3")
    assert code == EXIT_MISMATCH and json.loads(out)["match"] is False


def test_oracle_check_too_large(capsys):
    code, _, _ = run(capsys, "oracle-check", "--N", "6")
    assert code == EXIT_DOMAIN


def test_cost_curve_fig_grid(capsys, tmp_path):
    path = tmp_path / "curve.csv"
    argv = ["cost-curve", "--N", "6", "--beta-ep", str(1 / 30), "--gap-min", "1", "--gap-max", "60",
            "--gap-count", "100", "--out", str(path)]
    code, _, err = run(capsys, *argv)
    first = path.read_bytes()
    assert code == EXIT_OK
    lines = first.decode().splitlines()
    assert lines[0] == "E_F_over_EP,beta_prime,c_max,dE_I,dE_II,dE_total"
    assert len(lines) == 101
    summary = json.loads(err)
    assert summary["c_max_increasing"] and summary["dE_I_increasing"]
    run(capsys, *argv)
    assert path.read_bytes() == first


def test_cost_curve_single_gap(capsys):
    code, out, _ = run(capsys, "cost-curve", "--N", "2", "--gap-count", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 1 and float(rows[0]["dE_I"]) == 0.0


def test_cost_curve_json(capsys):
    code, out, _ = run(capsys, "cost-curve", "--N", "2", "--gap-count", "3", "--format", "json")
    assert code == EXIT_OK and len(json.loads(out)) == 3


def test_io_error_exit(capsys, tmp_path):
    code, _, _ = run(capsys, "cost-curve", "--N", "2", "--gap-count", "2", "--out", str(tmp_path / "no" / "x.csv"))
    assert code == EXIT_IO


def test_demo(capsys):
    code, out, _ = run(capsys, "demo", "--N", "3")
    assert code == EXIT_OK and "worked examples: 6/6" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "finmeas", "cmax", "--N", "1", "--beta-ep", "inf"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["c_max"] == 1.0
