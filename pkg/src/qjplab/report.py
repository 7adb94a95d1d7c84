"""Report containers shared by the scenario runner and the acceptance suite."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SWEEP_HEADER = ["g", "quantity", "value", "analytic_value", "abs_error"]


def fmt(value) -> str:
    """Full round-trip text for one CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value) + 0.0:.17g}"
    return str(value)


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": _json_number(self.measured),
            "tolerance": _json_number(self.tolerance),
            "passed": bool(self.passed),
            "note": self.note,
        }


def check_le(name: str, measured: float, tolerance: float, note: str = "") -> Check:
    measured = float(measured)
    return Check(name, measured, float(tolerance), bool(math.isfinite(measured) and measured <= tolerance), note)


def check_true(name: str, condition: bool, measured: float = 0.0, note: str = "") -> Check:
    return Check(name, float(measured), 0.0, bool(condition), note)


def _json_number(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


@dataclass
class Table:
    name: str
    header: list
    rows: list = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.header):
            raise ValueError(f"row of length {len(row)} for header {self.header}")
        self.rows.append(list(row))

    def column(self, key) -> list:
        idx = self.header.index(key)
        return [r[idx] for r in self.rows]

    def select(self, quantity: str, x: str = "g", y: str = "value"):
        qi = self.header.index("quantity")
        xi, yi = self.header.index(x), self.header.index(y)
        pts = [(float(r[xi]), float(r[yi])) for r in self.rows if r[qi] == quantity]
        return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])

    def nonfinite_count(self) -> int:
        return sum(
            1 for r in self.rows for v in r if isinstance(v, (float, np.floating)) and not math.isfinite(float(v))
        )

    def to_csv_text(self) -> str:
        lines = [",".join(self.header)]
        for r in self.rows:
            lines.append(",".join(_csv_cell(fmt(v)) for v in r))
        return "\n".join(lines) + "\n"


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def sweep_table(name: str) -> Table:
    return Table(name, list(SWEEP_HEADER))


@dataclass
class Series:
    label: str
    table: str
    x: str = "g"
    y: str = "value"
    quantity: str | None = None
    style: str = "lines"


@dataclass
class PlotSpec:
    stem: str
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)
    logy: bool = False
    heatmap: str | None = None  # table name with columns (x, p, value) on a regular grid


@dataclass
class ReportBundle:
    name: str
    kind: str
    seed: int
    tables: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    plots: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)  # filename -> text (JSON tables and the like)

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for c in self.checks)

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def add_error(self, stage: str, exc: BaseException):
        self.errors.append({"stage": stage, "type": type(exc).__name__, "message": str(exc)})

    def merge(self, other: "ReportBundle", prefix: str = ""):
        self.tables.extend(other.tables)
        self.plots.extend(other.plots)
        self.extras.update(other.extras)
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.measured, c.tolerance, c.passed, c.note))
        for e in other.errors:
            self.errors.append(dict(e, stage=prefix + e["stage"]))

    def summary(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "seed": self.seed,
            "passed": self.passed,
            "n_checks": len(self.checks),
            "n_failed": sum(1 for c in self.checks if not c.passed),
            "checks": [c.as_dict() for c in self.checks],
            "errors": list(self.errors),
            "tables": [t.name + ".csv" for t in self.tables],
        }

    def write(self, out_dir) -> list:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for t in self.tables:
            path = out / f"{t.name}.csv"
            path.write_text(t.to_csv_text(), encoding="utf-8")
            written.append(path)
        for fname, text in sorted(self.extras.items()):
            path = out / fname
            path.write_text(text, encoding="utf-8")
            written.append(path)
        path = out / "summary.json"
        path.write_text(json.dumps(self.summary(), indent=2) + "\n", encoding="utf-8")
        written.append(path)
        return written

