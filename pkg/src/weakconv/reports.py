"""Tabular check reports and their CSV serialization."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MODULI_COLUMNS = ("eps", "value", "bound_lower", "bound_upper", "pass")
PROJECTION_COLUMNS = ("trial", "input", "output", "bound", "pass")


def format_cell(value):
    """Render one cell deterministically ('.' decimal, shortest round-trip)."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(format_cell(v) for v in np.ravel(value))
    return str(value)


@dataclass
class Report:
    """Outcome of a checker: one dict per row plus an overall verdict."""

    name: str
    rows: list = field(default_factory=list)
    passed: bool = True
    info: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.passed)

    def column(self, key):
        return np.array([row[key] for row in self.rows])

    def failures(self):
        return [row for row in self.rows if not row.get("pass", True)]

    def to_csv(self, columns=None):
        columns = list(columns or (self.rows[0].keys() if self.rows else ["pass"]))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in self.rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])
        return buf.getvalue()

    def write_csv(self, path, columns=None):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv(columns))
        return path
