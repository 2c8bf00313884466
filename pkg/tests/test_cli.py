import json
import math
from pathlib import Path

import pandas as pd
import pytest

from nc_restriction.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, SUITES, exit_code, reports_path, run
from nc_restriction.reporting import ResidualReport, read_reports

DATA_PATH = Path(__file__).parent / "data"


def test_delta_exact(capsys):
    code = run(["run", "delta-exact", "--group", "dihedral:6", "--F", "indices:6", "--V", "indices:0,1,5,7"])
    assert code == EXIT_PASS
    assert "delta_F(V) = 3/4" in capsys.readouterr().out


def test_json_output(tmp_path):
    path = tmp_path / "delta.json"
    assert run(["run", "delta-exact", "--output", str(path), "--format", "json"]) == EXIT_PASS
    data = json.loads(path.read_text())
    assert data["fraction"] == "3/4"
    assert data["config"]["command"] == "delta-exact"


def test_group_table(tmp_path):
    path = tmp_path / "group.csv"
    assert run(["run", "group", "--group", "dihedral:3", "--output", str(path)]) == EXIT_PASS
    frame = pd.read_csv(path)
    assert len(frame) == 6
    assert frame["central"].sum() == 1


def test_reports_are_written(tmp_path):
    path = tmp_path / "identities.csv"
    code = run(
        ["run", "identity-check", "--configurations", "4", "--max-order", "6", "--trials", "2", "--output", str(path)]
    )
    assert code == EXIT_PASS
    reports = read_reports(reports_path(str(path)))
    assert [report.name for report in reports] == [
        "multiplier consummation identity",
        "multiplier translation identity",
        "nested multiplier identity",
    ]


def test_config_file(tmp_path, capsys):
    config = tmp_path / "delta.cfg"
    config.write_text("group = cyclic:6\nF = indices:1\nV = indices:0,1\n")
    assert run(["run", "delta-exact", "--config", str(config)]) == EXIT_PASS
    assert "delta_F(V) = 1" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert run(["run", "group", "--group", "torus:3"]) == EXIT_USAGE
    assert run(["run", "key-lemma", "--samples", "10"]) == EXIT_USAGE
    assert run(["run", "delta-exact", "--config", str(DATA_PATH / "broken.cfg")]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_malformed_command_line():
    with pytest.raises(SystemExit) as error:
        run(["run", "unknown"])
    assert error.value.code == EXIT_USAGE
    with pytest.raises(SystemExit):
        run(["suite", "everything"])


def test_exit_code():
    passing = ResidualReport("identity", 0.0, 1e-10)
    failing = ResidualReport("identity", 1.0, 1e-10)
    untestable = ResidualReport("lower bound", math.nan, 1e-9)
    informational = ResidualReport("duality", 1.0, 0.05, {"informational": True})
    assert exit_code([passing, untestable, informational]) == EXIT_PASS
    assert exit_code([passing, failing]) == EXIT_FAIL
    assert reports_path("out/result.csv") == "out/result.reports.jsonl"


@pytest.mark.parametrize("name", ["theoremA", "theoremB", "restriction", "lower-bound"])
def test_suite_names(monkeypatch, tmp_path, capsys, name):
    seeds = []

    def bundle(seed):
        seeds.append(seed)
        return [ResidualReport("identity", 0.0, 1e-10)]

    monkeypatch.setitem(SUITES, name, bundle)
    path = tmp_path / "suite.jsonl"
    assert run(["suite", name, "--seed", "5", "--output", str(path)]) == EXIT_PASS
    assert seeds == [5]
    assert [report.name for report in read_reports(str(path))] == ["identity"]
    assert "identity" in capsys.readouterr().out


def test_suite_has_no_format_flag():
    with pytest.raises(SystemExit) as error:
        run(["suite", "lemmas", "--format", "csv"])
    assert error.value.code == EXIT_USAGE
