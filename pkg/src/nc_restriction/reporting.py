"""
Reporting Module

Pass/fail residual reports, timing of named blocks and the writers for tabular results
(CSV or parquet through pandas), JSON lines and the summary table printed after a run.

"""

import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List

import pandas as pd
from prettytable import PrettyTable

logger = logging.getLogger(__name__)

FORMATS = ("csv", "parquet", "json")


class UnknownFormatError(Exception):
    """Exception raised when an output format is not csv, parquet or json"""


@dataclass
class ResidualReport:
    """
    Outcome of one exact or statistical check.

    Attributes:
        name: descriptive name of the checked statement.
        residual: nonnegative deviation, or nan for configurations that could not be tested.
        tolerance: largest accepted residual.
        context: metadata echoed into the JSON output.
    """

    name: str
    residual: float
    tolerance: float
    context: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """residual <= tolerance; an untestable (nan) residual never passes"""
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "context": self.context,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ResidualReport":
        return cls(data["name"], float(data["residual"]), float(data["tolerance"]), dict(data.get("context", {})))


class Timer:
    """Context manager logging the elapsed time of a named block"""

    def __init__(self, name: str):
        self.name = name
        self.start = None
        self.elapsed = 0.0

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *args):
        self.elapsed = time.perf_counter() - self.start
        logger.info("Execution time for %s is %0.6f s", self.name, self.elapsed)


def json_default(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, "tolist"):
        return value.tolist()
    if hasattr(value, "item"):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _ensure_parent(path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)


def write_frame(frame: pd.DataFrame, path: str, output_format: str = "csv") -> None:
    """
    Write a result table.

    Args:
        frame (pd.DataFrame): the table.
        path (str): output file.
        output_format (str): "csv" (round-trip float formatting), "parquet" (pyarrow) or "json" (records, one per line).
    """
    if output_format not in FORMATS:
        raise UnknownFormatError(f"Unknown output format '{output_format}', expected one of {FORMATS}.")
    _ensure_parent(path)
    if output_format == "csv":
        frame.to_csv(path, index=False, float_format="%.17g")
    elif output_format == "parquet":
        frame.to_parquet(path, engine="pyarrow", index=False)
    else:
        frame.to_json(path, orient="records", lines=True, double_precision=15)
    logger.info("Wrote %d rows to %s", len(frame), path)


def read_frame(path: str, output_format: str = "csv") -> pd.DataFrame:
    """Read a table written by write_frame"""
    if output_format == "csv":
        return pd.read_csv(path)
    if output_format == "parquet":
        return pd.read_parquet(path, engine="pyarrow")
    if output_format == "json":
        return pd.read_json(path, orient="records", lines=True)
    raise UnknownFormatError(f"Unknown output format '{output_format}', expected one of {FORMATS}.")


def write_json(data: Dict[str, Any], path: str) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as file:
        json.dump(data, file, indent=2, default=json_default, allow_nan=True)


def write_reports(reports: Iterable[ResidualReport], path: str) -> None:
    """One ResidualReport per line"""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as file:
        for report in reports:
            file.write(json.dumps(report.to_dict(), default=json_default) + "\n")


def read_reports(path: str) -> List[ResidualReport]:
    with open(path, encoding="utf-8") as file:
        return [ResidualReport.from_dict(json.loads(line)) for line in file if line.strip()]


def reports_frame(reports: Iterable[ResidualReport]) -> pd.DataFrame:
    """Flat table of reports, context keys become columns"""
    rows = []
    for report in reports:
        row = {"name": report.name, "residual": report.residual, "tolerance": report.tolerance, "pass": report.passed}
        row.update({key: value for key, value in report.context.items() if not isinstance(value, (list, dict))})
        rows.append(row)
    return pd.DataFrame(rows)


def _format_number(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "untestable"
    return f"{value:.3e}"


def summary_table(reports: Iterable[ResidualReport]) -> PrettyTable:
    """Statement, value, tolerance and pass for every report"""
    table = PrettyTable()
    table.field_names = ["statement", "residual / estimate", "tolerance", "pass"]
    for report in reports:
        table.add_row([report.name, _format_number(report.residual), _format_number(report.tolerance), report.passed])
    table.align["statement"] = "l"
    return table
