import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from wehrl_lab import cli
from wehrl_lab.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, SCHEMA, Report, RunSpec


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_csv(capsys):
    code, out, _ = run(capsys, "spectrum", "--two-j", "1", "--k", "1")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["j", "lambda", "numeric"]
    assert float(rows[1][1]) == pytest.approx(2 / 3) and float(rows[2][1]) == pytest.approx(1 / 3)


def test_json_report_keys(capsys):
    code, out, _ = run(capsys, "wehrl", "--two-j", "2", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["schema"] == SCHEMA
    assert {"command", "parameters", "build", "seed", "verdict", "min_slack", "rows",
            "violations"} <= set(doc)
    assert doc["rows"][0]["wehrl"] == pytest.approx(2 / 3, abs=1e-9)


def test_floats_have_17_significant_digits(capsys):
    _, out, _ = run(capsys, "spectrum", "--two-j", "2", "--k", "1")
    first, second = (line.split(",")[1] for line in out.splitlines()[1:3])
    assert (first, second) == ("0.75", "0.25")      # exact binary values print short
    _, out, _ = run(capsys, "spectrum", "--two-j", "1", "--k", "1")
    assert out.splitlines()[1].split(",")[1] == format(2 / 3, ".17g")


def test_output_is_byte_identical(capsys):
    args = ("verify-majorization", "--two-j", "2", "--k", "2", "--trials", "40", "--seed", "9",
            "--format", "json")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    _, c, _ = run(capsys, *args, "--threads", "3")
    assert a == b
    assert json.loads(a)["rows"] == json.loads(c)["rows"]


@pytest.mark.parametrize("argv", [
    ["spectrum", "--two-j", "-1", "--k", "1"],
    ["spectrum", "--two-j", "2"],
    ["spectrum", "--two-j", "2", "--k", "-1"],
    ["verify-majorization", "--two-j", "2", "--k", "0"],
    ["berezin-lieb", "--two-j", "2", "--f", "power:3"],
    ["limit", "--two-j", "2", "--k-values", "5,2"],
    ["wehrl", "--two-j", "2", "--state", "thermal"],
    ["nonsense"],
    ["spectrum", "--two-j", "2", "--k", "1", "--seed", "-4"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = cli.main(argv)
        raise SystemExit(code)
    assert exc.value.code == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_env_quad_level(capsys, monkeypatch):
    monkeypatch.setenv(cli.QUAD_ENV, "3")
    _, out, _ = run(capsys, "wehrl", "--two-j", "1", "--format", "json")
    assert json.loads(out)["parameters"]["quad_level"] == 3
    monkeypatch.setenv(cli.QUAD_ENV, "zero")
    code, _, err = run(capsys, "wehrl", "--two-j", "1")
    assert code == EXIT_USAGE and cli.QUAD_ENV in err


def test_unwritable_path(capsys, tmp_path):
    code, _, err = run(capsys, "spectrum", "--two-j", "1", "--k", "1", "--out",
                       str(tmp_path / "missing" / "x.csv"))
    assert code == EXIT_IO and "cannot write" in err


def test_out_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "pminus-check", "--two-j", "2", "--two-k", "5", "--trials", "5",
                       "--format", "json", "--out", str(path))
    assert code == EXIT_OK and out == ""
    doc = json.loads(path.read_text())
    assert doc["rows"][0]["mu_abs2"] == pytest.approx(4 / 6)


def test_violation_exit_code_and_payload(capsys, monkeypatch):
    rho = np.eye(2) / 2

    def fake(params):
        return Report("wehrl", params, False, -1.0, ["x"], [(1.0,)], {},
                      [{"rho_real": rho.tolist(), "slack": -1.0}])

    monkeypatch.setitem(cli.CAMPAIGNS, "wehrl", fake)
    code, out, _ = run(capsys, "wehrl", "--two-j", "1", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_VIOLATION
    assert doc["verdict"] == "violation" and doc["violations"][0]["slack"] == -1.0


def test_runspec_rejects_foreign_parameters():
    with pytest.raises(cli.UsageError):
        RunSpec("spectrum", {"two_j": 1, "k": 1, "n_max": 3})
    with pytest.raises(cli.UsageError):
        RunSpec("plot", {})


@pytest.mark.parametrize("argv", [
    ["berezin-lieb", "--two-j", "2", "--state", "mixed", "--seed", "3"],
    ["limit", "--two-j", "1", "--k-values", "1,10,100"],
    ["search-min-entropy", "--two-j", "2", "--k", "1", "--restarts", "2", "--f", "xlogx",
     "--f", "negpower:2"],
    ["glauber", "--n-max", "2", "--trials", "4"],
])
def test_other_commands_pass(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    assert out.splitlines()[0]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wehrl_lab.cli", "spectrum", "--two-j", "1",
                           "--k", "2"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("j,lambda,numeric\n")
