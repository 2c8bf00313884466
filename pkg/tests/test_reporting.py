import math

import pandas as pd
import pytest

from nc_restriction.deleeuw_harness import untestable_report
from nc_restriction.reporting import (
    ResidualReport,
    Timer,
    UnknownFormatError,
    read_frame,
    read_reports,
    reports_frame,
    summary_table,
    write_frame,
    write_json,
    write_reports,
)

frame = pd.DataFrame({"rho": [2.0, 4.0, 8.0], "count": [4, 20, 52]})
reports = [
    ResidualReport("restriction to subgroup", 1e-12, 1e-10, {"group": "dihedral:6", "p": 3.0}),
    ResidualReport("lattice growth exponent", 0.3, 0.15, {"radii": [2.0, 4.0]}),
    untestable_report("contraction of polar parts", "V meets sVs"),
]


def test_passed():
    assert reports[0].passed
    assert not reports[1].passed
    assert not reports[2].passed
    assert math.isnan(reports[2].residual)
    assert reports[2].to_dict()["pass"] is False


@pytest.mark.parametrize("output_format", ["csv", "parquet", "json"])
def test_write_and_read_frame(tmp_path, output_format):
    path = tmp_path / "nested" / f"result.{output_format}"
    write_frame(frame, str(path), output_format)
    back = read_frame(str(path), output_format)
    assert back["rho"].tolist() == frame["rho"].tolist()
    assert back["count"].tolist() == frame["count"].tolist()


def test_csv_keeps_full_precision(tmp_path):
    path = tmp_path / "precise.csv"
    values = pd.DataFrame({"x": [0.1 + 0.2, 1 / 3]})
    write_frame(values, str(path))
    assert read_frame(str(path))["x"].tolist() == values["x"].tolist()


def test_UnknownFormatError(tmp_path):
    with pytest.raises(UnknownFormatError):
        write_frame(frame, str(tmp_path / "result.xlsx"), "xlsx")
    with pytest.raises(UnknownFormatError):
        read_frame(str(tmp_path / "result.xlsx"), "xlsx")


def test_reports_roundtrip(tmp_path):
    path = tmp_path / "result.reports.jsonl"
    write_reports(reports, str(path))
    back = read_reports(str(path))
    assert [r.name for r in back] == [r.name for r in reports]
    assert back[0].context == reports[0].context
    assert math.isnan(back[2].residual)


def test_write_json(tmp_path):
    path = tmp_path / "payload.json"
    write_json({"value": 1 + 2j, "rows": [1, 2]}, str(path))
    assert '"value"' in path.read_text()


def test_reports_frame():
    table = reports_frame(reports)
    assert table["pass"].tolist() == [True, False, False]
    assert "radii" not in table.columns
    assert table.loc[0, "group"] == "dihedral:6"


def test_summary_table():
    text = summary_table(reports).get_string()
    assert "untestable" in text
    assert "lattice growth exponent" in text


def test_Timer():
    with Timer("noop") as timer:
        pass
    assert timer.elapsed >= 0.0
