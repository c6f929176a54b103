"""Reading tables and probability vectors; writing reports as JSON and CSV."""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

import numpy as np

from .tables import STAT_NAMES, ContingencyTable, TestReport

__all__ = [
    "ParseError",
    "NegativeCount",
    "RaggedRows",
    "read_table_csv",
    "parse_table_csv",
    "read_vector",
    "report_to_json",
    "report_from_json",
    "report_to_csv",
    "report_from_csv",
]


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class NegativeCount(ParseError):
    pass


class RaggedRows(ParseError):
    pass


def parse_table_csv(text: str) -> ContingencyTable:
    """Parse a labelled table: header row of column labels, then ``label,count,...`` rows.

    The header's first field must be blank or ``rows``.  Blank lines are skipped.
    """
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1) if any(f.strip() for f in r)]
    if not rows:
        raise ParseError("empty table file")
    head_line, header = rows[0]
    header = [f.strip() for f in header]
    if header[0].lower() not in ("", "rows"):
        raise ParseError(f"first header field must be blank or 'rows', got {header[0]!r}", head_line, 1)
    col_labels = header[1:]
    if len(col_labels) < 1:
        raise ParseError("header has no column labels", head_line)

    row_labels, data = [], []
    for line, fields in rows[1:]:
        fields = [f.strip() for f in fields]
        if len(fields) != len(header):
            raise RaggedRows(f"expected {len(header)} fields, found {len(fields)}", line)
        row = []
        for col, cell in enumerate(fields[1:], start=2):
            try:
                v = int(cell)
            except ValueError:
                raise ParseError(f"not an integer count: {cell!r}", line, col) from None
            if v < 0:
                raise NegativeCount(f"negative count {v} in row {fields[0]!r}, column {header[col - 1]!r}", line, col)
            row.append(v)
        row_labels.append(fields[0])
        data.append(row)
    if not data:
        raise ParseError("table has no data rows")
    return ContingencyTable(np.array(data, dtype=np.int64), tuple(row_labels), tuple(col_labels))


def read_table_csv(path) -> ContingencyTable:
    return parse_table_csv(Path(path).read_text(encoding="utf-8"))


_SPLIT = re.compile(r"[,\s;]+")


def read_vector(path, dtype=float) -> np.ndarray:
    """Numbers separated by commas, semicolons or whitespace; ``#`` starts a comment."""
    values = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0]
        for tok in filter(None, _SPLIT.split(line.strip())):
            try:
                values.append(dtype(tok))
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", line_no) from None
    if not values:
        raise ParseError(f"no numbers in {path}")
    return np.array(values, dtype=dtype)


def report_to_json(report: TestReport) -> str:
    # json emits floats with repr, the shortest round-trip form
    return json.dumps(report.to_dict(), indent=2)


def report_from_json(text: str) -> TestReport:
    return TestReport.from_dict(json.loads(text))


_CSV_COLUMNS = ("statistic", "value", "threshold", "p_value", "decision", "df", "alpha")


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def report_to_csv(report: TestReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_CSV_COLUMNS)
    for name in STAT_NAMES:
        dec = report.decisions[name]
        w.writerow(
            [
                name,
                _num(report.statistics[name]),
                _num(report.threshold),
                _num(report.p_values[name]),
                "" if dec is None else ("reject" if dec else "accept"),
                report.df,
                _num(report.alpha),
            ]
        )
    comb = report.combined_decision
    w.writerow(["combined", "", _num(report.threshold), "", "" if comb is None else ("reject" if comb else "accept"),
                report.df, _num(report.alpha)])  # fmt: skip
    return buf.getvalue()


def report_from_csv(text: str) -> dict[str, dict]:
    """Parse :func:`report_to_csv` output back into ``{statistic: row}``."""
    out = {}
    for row in csv.DictReader(io.StringIO(text)):
        out[row["statistic"]] = {
            "value": float(row["value"]) if row["value"] else None,
            "threshold": float(row["threshold"]),
            "p_value": float(row["p_value"]) if row["p_value"] else None,
            "decision": row["decision"] or None,
            "df": int(row["df"]),
            "alpha": float(row["alpha"]),
        }
    return out
