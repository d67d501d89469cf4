"""Structured, deterministic reports for the command-line experiments.

A report carries the command name, a full echo of the configuration,
named results with the tolerance each was tested against, and a
pass/fail verdict per check.  Serialization is canonical (sorted keys,
repr-roundtrip floats), so identical config + seed yields byte-identical
output.  Wall-clock timings are kept in memory only; they are never
serialized, which is what makes reports reproducible.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Check", "Report"]


def _canonical(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.complexfloating, complex)):
        return {"re": float(np.real(value)), "im": float(np.imag(value))}
    if isinstance(value, np.ndarray):
        return [_canonical(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, (bool, str)) or value is None:
        return value
    return repr(value)


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    comparison: str = "<="


@dataclass
class Report:
    command: str
    config: dict
    results: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict, repr=False)

    def add_check(self, name: str, value: float, tolerance: float,
                  comparison: str = "<=") -> bool:
        value = float(value)
        if comparison == "<=":
            ok = value <= tolerance
        elif comparison == ">=":
            ok = value >= tolerance
        else:
            raise ValueError(f"unknown comparison '{comparison}'")
        self.checks.append(Check(name, value, float(tolerance), bool(ok), comparison))
        return ok

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": _canonical(self.config),
            "results": _canonical(self.results),
            "checks": [
                {
                    "name": c.name,
                    "value": _canonical(c.value),
                    "tolerance": _canonical(c.tolerance),
                    "comparison": c.comparison,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
            "all_passed": self.all_passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2,
                          separators=(",", ": ")) + "\n"

    def to_csv(self) -> str:
        """Checks plus any tabular results, fixed column order per command."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["section", "name", "value", "tolerance", "comparison", "passed"])
        for c in self.checks:
            writer.writerow(["check", c.name, repr(float(c.value)),
                             repr(float(c.tolerance)), c.comparison, c.passed])
        rows = self.results.get("rows")
        if rows:
            cols = list(rows[0].keys())
            writer.writerow([])
            writer.writerow(["row"] + cols)
            for row in rows:
                writer.writerow(["row"] + [repr(_scalarize(row[k])) for k in cols])
        return buf.getvalue()


def _scalarize(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v
