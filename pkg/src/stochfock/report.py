"""Machine-readable command reports and their md / csv / json renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from importlib import resources

from . import __version__

FORMATS = ("md", "csv", "json")


def format_cell(value, precision=4):
    """Render one cell; floats are rounded half-to-even at ``precision`` decimals."""
    if isinstance(value, bool) or value is None:
        return str(value).lower() if value is not None else ""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        quantum = Decimal(1).scaleb(-precision)
        return str(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_EVEN))
    return str(value)


@dataclass
class Table:
    name: str
    columns: list
    rows: list

    def to_dict(self):
        return {"name": self.name, "columns": list(self.columns), "rows": [list(r) for r in self.rows]}


@dataclass
class Report:
    command: str
    inputs: dict = field(default_factory=dict)
    tables: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    precision: int = 4
    version: str = __version__

    def to_dict(self):
        return {
            "command": {"name": self.command, "version": self.version, "inputs": self.inputs},
            "result": {
                "tables": [t.to_dict() for t in self.tables],
                "metrics": self.metrics,
            },
            "provenance": {"notes": list(self.notes), "precision": self.precision},
        }

    @classmethod
    def from_dict(cls, data):
        cmd, res, prov = data["command"], data["result"], data["provenance"]
        return cls(
            command=cmd["name"],
            version=cmd["version"],
            inputs=cmd["inputs"],
            tables=[Table(t["name"], t["columns"], t["rows"]) for t in res["tables"]],
            metrics=res["metrics"],
            notes=prov["notes"],
            precision=prov["precision"],
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def render(self, fmt="md"):
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self._csv()
        if fmt == "md":
            return self._markdown()
        raise ValueError(f"unknown format {fmt!r}")

    def _markdown(self):
        def cell(v):
            return format_cell(v, self.precision).replace("|", "\\|")

        out = [f"# {self.command}", ""]
        for table in self.tables:
            out += [f"## {table.name}", ""]
            out.append("| " + " | ".join(cell(str(c)) for c in table.columns) + " |")
            out.append("|" + "|".join("---" for _ in table.columns) + "|")
            for row in table.rows:
                out.append("| " + " | ".join(cell(v) for v in row) + " |")
            out.append("")
        if self.metrics:
            out += ["## metrics", "", "| name | value |", "|---|---|"]
            for name, value in self.metrics.items():
                out.append(f"| {cell(name)} | {cell(value)} |")
            out.append("")
        if self.notes:
            out += ["## notes", ""] + [f"- {n}" for n in self.notes] + [""]
        return "\n".join(out)

    def _csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        if len(self.tables) == 1 and not self.metrics:
            table = self.tables[0]
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow([format_cell(v, self.precision) for v in row])
            return buf.getvalue()
        # long layout: one record per value
        writer.writerow(["section", "row", "column", "value"])
        for table in self.tables:
            for i, row in enumerate(table.rows):
                for col, v in zip(table.columns, row):
                    writer.writerow([table.name, i, col, format_cell(v, self.precision)])
        for name, value in self.metrics.items():
            writer.writerow(["metrics", "", name, format_cell(value, self.precision)])
        return buf.getvalue()


def load_schema():
    return json.loads(resources.files("stochfock").joinpath("report.schema.json").read_text())
