"""Command-line front end: exit codes, artifacts and reproducibility."""
import csv

import pytest

from trppm_lab import cli
from trppm_lab.errors import NumericalFailure

PASSING = """
seed = 42
x0 = [10.0]

[problem]
name = "quartic1d"

[solver]
regime = "TRPPM_FIXED_T"
t = 0.5
lambda_rule = "BISECTION"
max_iters = 100

[verification.envelope]
tol = 1e-7

[verification.active_step]
tol = 1e-6

[verification.fejer]
[verification.descent]
"""

# constant lambda far above the critical value: steps fall short of t
FAILING = """
x0 = [10.0]

[problem]
name = "quartic1d"

[solver]
regime = "TRPPM_FIXED_T"
t = 0.5
lambda = 5000.0
max_iters = 50

[verification.active_step]
tol = 1e-6
"""


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("TRPPM_SEED", raising=False)
    return tmp_path


def write(workdir, name, text):
    path = workdir / name
    path.write_text(text)
    return str(path)


def test_run_success_writes_artifacts(workdir, capsys):
    code = cli.main(["run", write(workdir, "exp.toml", PASSING)])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "seed: 42"
    assert out.rstrip().endswith("overall: PASS")
    report = (workdir / "report.txt").read_text()
    assert report == out
    rows = list(csv.DictReader((workdir / "trace.csv").open()))
    assert rows[0]["k"] == "0"
    assert rows[0]["f_gap"] == "2500"
    assert rows[0]["dist"] == "10"
    assert rows[0]["active"] == "true"
    assert rows[-1]["active"] == "false"
    assert rows[-1]["step_len"] == "0"
    # %.17g round-trips the repeated-division envelope bit for bit
    assert float(rows[3]["envelope"]) == 2500.0 / 1.05 / 1.05 / 1.05


def test_run_is_byte_deterministic(workdir):
    path = write(workdir, "exp.toml", PASSING)
    assert cli.main(["run", path]) == 0
    first_csv = (workdir / "trace.csv").read_bytes()
    first_report = (workdir / "report.txt").read_bytes()
    assert cli.main(["run", path]) == 0
    assert (workdir / "trace.csv").read_bytes() == first_csv
    assert (workdir / "report.txt").read_bytes() == first_report


def test_run_failing_check_exits_1(workdir, capsys):
    code = cli.main(["run", write(workdir, "bad.toml", FAILING)])
    assert code == 1
    out = capsys.readouterr().out
    assert "active_step: FAIL" in out
    assert out.rstrip().endswith("overall: FAIL")


def test_run_missing_config_exits_2(workdir, capsys):
    assert cli.main(["run", "nope.toml"]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_invalid_toml_exits_2(workdir, capsys):
    path = write(workdir, "broken.toml", "not toml [")
    assert cli.main(["run", path]) == 2
    assert "TOML parse error" in capsys.readouterr().err


def test_numerical_failure_exits_3_and_writes_stub(workdir, capsys, monkeypatch):
    def explode(problem, x0, config):
        raise NumericalFailure("synthetic solver breakdown", residual=0.25)

    monkeypatch.setattr(cli, "run", explode)
    code = cli.main(["run", write(workdir, "exp.toml", PASSING)])
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err
    # artifacts still land on disk for post-mortems
    assert (workdir / "trace.csv").read_text().strip() == ",".join(cli.CSV_COLUMNS)
    report = (workdir / "report.txt").read_text()
    assert "numerical_failure: FAIL" in report
    assert "synthetic solver breakdown" in report


def test_env_seed_overrides_config(workdir, capsys, monkeypatch):
    monkeypatch.setenv("TRPPM_SEED", "99")
    assert cli.main(["run", write(workdir, "exp.toml", PASSING)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "seed: 99"


def test_env_seed_must_be_integer(workdir, capsys, monkeypatch):
    monkeypatch.setenv("TRPPM_SEED", "many")
    assert cli.main(["run", write(workdir, "exp.toml", PASSING)]) == 2
    assert "TRPPM_SEED" in capsys.readouterr().err


def test_sweep_writes_summary_and_entries(workdir, capsys):
    path = write(workdir, "exp.toml", PASSING)
    code = cli.main(["sweep", path, "--axis", "solver.t", "--values", "0.25,0.5"])
    assert code == 0
    out = capsys.readouterr().out
    assert "solver.t=0.25: pass" in out and "solver.t=0.5: pass" in out
    summary = (workdir / "trace__sweep.csv").read_text().splitlines()
    assert summary[0] == "axis_value,final_f_gap,iters_to_neighborhood,fitted_rate,status"
    assert len(summary) == 3
    for tag in ("0.25", "0.5"):
        assert (workdir / f"trace__solver_t={tag}.csv").exists()
        assert (workdir / f"report__solver_t={tag}.txt").exists()
    # halving t doubles the iteration count to the neighborhood
    first, second = summary[1].split(","), summary[2].split(",")
    assert first[4] == "pass" and second[4] == "pass"
    assert int(first[2]) > int(second[2])


def test_sweep_records_per_value_failures(workdir, capsys):
    # lambda sweep on a constant-rule config: the huge value breaks the
    # active-step guarantee but the sweep itself completes
    path = write(workdir, "exp.toml", FAILING)
    code = cli.main(["sweep", path, "--axis", "solver.lambda", "--values", "0.001,5000"])
    assert code == 1
    lines = (workdir / "trace__sweep.csv").read_text().splitlines()
    assert lines[1].startswith("0.001,") and lines[1].endswith(",pass")
    assert lines[2].startswith("5000,") and lines[2].endswith(",check_failed")


def test_sweep_invalid_value_rows_keep_going(workdir):
    # negative radius is rejected per entry, not fatally
    path = write(workdir, "exp.toml", PASSING)
    code = cli.main(["sweep", path, "--axis", "solver.t", "--values=-1,0.5"])
    assert code == 1
    lines = (workdir / "trace__sweep.csv").read_text().splitlines()
    assert "error" in lines[1]
    assert lines[2].endswith(",pass")


def test_sweep_unknown_axis_exits_2(workdir, capsys):
    path = write(workdir, "exp.toml", PASSING)
    assert cli.main(["sweep", path, "--axis", "solver.seed", "--values", "1"]) == 2
    assert "known axes" in capsys.readouterr().err


def test_sweep_non_numeric_values_exit_2(workdir, capsys):
    path = write(workdir, "exp.toml", PASSING)
    assert cli.main(["sweep", path, "--axis", "solver.t", "--values", "a,b"]) == 2


def test_sweep_empty_values_is_a_no_op(workdir, capsys):
    path = write(workdir, "exp.toml", PASSING)
    assert cli.main(["sweep", path, "--axis", "solver.t", "--values", ""]) == 0
    assert "empty sweep" in capsys.readouterr().out


def test_verify_subcommand(workdir, capsys):
    assert cli.main(["verify", "operators"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "seed: 42"
    assert out.splitlines()[1] == "suite: operators"
    assert out.rstrip().endswith("overall: PASS")


def test_verify_seed_flag_and_env(workdir, capsys, monkeypatch):
    assert cli.main(["verify", "operators", "--seed", "7"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "seed: 7"
    monkeypatch.setenv("TRPPM_SEED", "11")
    assert cli.main(["verify", "operators"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "seed: 11"
    # an explicit flag beats the environment
    monkeypatch.setenv("TRPPM_SEED", "13")
    assert cli.main(["verify", "operators", "--seed", "5"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "seed: 5"


def test_unknown_suite_rejected_by_parser(workdir):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "everything"])
    assert exc.value.code == 2


def test_missing_subcommand_rejected(workdir):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
