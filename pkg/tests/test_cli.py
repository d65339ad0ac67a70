import json

import numpy as np
import pytest

from gpbogo import checks
from gpbogo.checks import CheckResult
from gpbogo.utils.errors import ConvergenceWarning
import main as cli
from main import EXIT_FAILED, EXIT_NUMERICAL, EXIT_PRECONDITION, EXIT_USAGE, main

WELL = "square_well:2,1"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_scatter(capsys):
    code, out = run(capsys, "scatter", "--potential", WELL)
    assert code == 0
    data = json.loads(out)
    assert data["config"]["command"] == "scatter"
    assert data["result"]["a0"] == pytest.approx(0.238406, abs=1e-6)
    assert data["result"]["closed_form"] == pytest.approx(1 - np.tanh(1.0))


def test_scatter_csv(capsys):
    code, out = run(capsys, "scatter", "--potential", WELL, "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "r,f"
    assert len(lines) == 202


def test_raw_e_lambda(capsys):
    with pytest.warns(ConvergenceWarning):
        code, out = run(capsys, "elambda", "--max-level", "1", "--method", "raw")
    assert code == 0
    partial = 6 * np.cos(1) + 6 * np.cos(np.sqrt(2)) + 8 / 3 * np.cos(np.sqrt(3))
    assert json.loads(out)["result"]["value"] == pytest.approx(2 - partial)


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        main(["tunnel"])
    assert info.value.code == 1


def test_missing_required_argument():
    with pytest.raises(SystemExit) as info:
        main(["neumann", "--potential", WELL])
    assert info.value.code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["scatter", "--potential", "cubic:1,1"],
        ["scatter", "--potential", "square_well:1"],
        ["neumann", "--potential", WELL, "--N", "2"],
        ["bogsum", "--a0", "-1"],
        ["born", "--potential", WELL, "--format", "csv"],
        ["simulate", "--potential", WELL, "--N", "4", "--pmax", "7", "--eta-mu", "1", "--nu", "2"],
    ],
)
def test_precondition_exit_code(capsys, argv):
    code, out = run(capsys, *argv)
    assert code == EXIT_PRECONDITION == 2
    assert out == ""


def test_coefficients_csv(capsys):
    code, out = run(
        capsys,
        "coeffs",
        "--potential", WELL,
        "--N", "20",
        "--mu", "12.6",
        "--max-level", "1",
        "--format", "csv",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "p,gamma,sigma,F,G,tau,sqrt(F^2-G^2),dispersion"
    assert len(lines) == 4


def test_config_file(tmp_path, capsys):
    config = tmp_path / "neumann.json"
    config.write_text(json.dumps({"potential": WELL, "N": 10}))
    code, out = run(capsys, "neumann", "--config", str(config))
    assert code == 0
    data = json.loads(out)
    assert data["config"]["N"] == 10
    assert data["result"]["lambdaN"] > 0

    config.write_text(json.dumps({"potential": WELL, "temperature": 1.0}))
    code, _ = run(capsys, "neumann", "--config", str(config))
    assert code == EXIT_PRECONDITION


def test_output_and_plot(tmp_path, capsys):
    output = tmp_path / "out" / "scatter.json"
    figure = tmp_path / "scatter.png"
    code, out = run(
        capsys, "scatter", "--potential", WELL, "--output", str(output), "--plot", str(figure)
    )
    assert code == 0
    assert out == ""
    assert json.loads(output.read_text())["result"]["a0"] > 0
    assert figure.exists()


def test_potential_file(tmp_path, capsys):
    path = tmp_path / "table.json"
    path.write_text(json.dumps({"kind": "tabulated", "samples": [[0, 1], [0.5, 1], [1, 0]]}))
    code, out = run(capsys, "born", "--potential", str(path), "--compare")
    assert code == 0
    result = json.loads(out)["result"]
    assert len(result["terms"]) == 2
    assert result["error"] < 0.1 * result["a0"]


def test_spectrum(capsys):
    code, out = run(capsys, "spectrum", "--a0", "0.01", "--occ", "1/0/0:2")
    assert code == 0
    result = json.loads(out)["result"]
    p = 2 * np.pi
    assert result["excitation_energy"] == pytest.approx(
        2 * np.sqrt(p ** 4 + 16 * np.pi * 0.01 * p ** 2)
    )


def test_check_subset(capsys):
    code, out = run(capsys, "check", "--suite", "1,12", "--no-pbar")
    assert code == 0
    result = json.loads(out)["result"]
    assert result["passed"]
    assert [r["criterion"] for r in result["results"]] == [1, 12]


def test_exit_codes_are_distinct():
    codes = {EXIT_USAGE, EXIT_PRECONDITION, EXIT_NUMERICAL, EXIT_FAILED}
    assert len(codes) == 4
    assert EXIT_NUMERICAL == 3


def test_numerical_failure_exit_code(monkeypatch, capsys):
    def singular(rho, a0):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr(cli, "lhy_energy_per_particle", singular)
    code, out = run(capsys, "lhy", "--a0", "0.01")
    assert code == EXIT_NUMERICAL
    assert out == ""


def test_failed_check_exit_code(monkeypatch, capsys):
    monkeypatch.setitem(checks.CHECKS, 1, lambda: CheckResult(1, False, 1.0, 0.0))
    code, out = run(capsys, "check", "--suite", "1", "--no-pbar")
    assert code == EXIT_FAILED
    assert not json.loads(out)["result"]["passed"]


@pytest.mark.slow
def test_full_check_suite(capsys):
    code, out = run(capsys, "check", "--suite", "all", "--no-pbar")
    result = json.loads(out)["result"]
    assert [r["criterion"] for r in result["results"] if not r["passed"]] == []
    assert code == 0
