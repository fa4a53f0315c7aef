"""Checks, run reports and the files they are written to.

Reports hold values rounded to four significant digits and no wall-clock
times, so two runs with the same configuration write identical bytes.
Timings go to a separate file next to the report.
"""
from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np


def rounded(x):
    """Four significant digits; non-finite values and exact zeros pass through."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if x == 0 or not np.isfinite(x):
        return x
    return float(f"{x:.3e}")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [rounded(x.real), rounded(x.imag)]
    if isinstance(x, (float, int, np.floating, np.integer, bool, np.bool_)):
        v = rounded(x)
        if isinstance(v, float) and not np.isfinite(v):
            return str(v)
        return v
    return x


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    relation: str = "<"
    error: str = ""

    @property
    def passed(self) -> bool:
        if self.error or not np.isfinite(self.value):
            return False
        v, t = self.value, self.tolerance
        return v < t if self.relation == "<" else v <= t

    def to_dict(self) -> dict:
        d = {"name": self.name, "value": _jsonable(self.value), "tolerance": self.tolerance,
             "relation": self.relation, "passed": self.passed}
        if self.error:
            d["error"] = self.error
        return d


@dataclass
class Table:
    header: list
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    return v


@dataclass
class RunReport:
    subcommand: str
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, tol, relation="<"):
        self.checks.append(Check(name, float(value), float(tol), relation))

    def fail(self, name, exc: Exception):
        self.checks.append(Check(name, float("nan"), 0.0, "<", f"{type(exc).__name__}: {exc}"))

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, "passed": self.passed,
                "config": _jsonable(self.config), "data": _jsonable(self.data),
                "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir: str, stem: str | None = None) -> dict:
        """Writes <stem>.json, <stem>_<table>.csv and <stem>.timings.json; returns the paths."""
        stem = stem or self.subcommand
        os.makedirs(out_dir, exist_ok=True)
        paths = {"report": os.path.join(out_dir, f"{stem}.json")}
        with open(paths["report"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())
        for name, table in self.tables.items():
            p = os.path.join(out_dir, f"{stem}_{name}.csv")
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(table.to_csv())
            paths[name] = p
        p = os.path.join(out_dir, f"{stem}.timings.json")
        with open(p, "w", encoding="utf-8") as fh:
            json.dump({k: round(v, 3) for k, v in self.timings.items()}, fh, indent=2, sort_keys=True)
        paths["timings"] = p
        return paths

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            msg = c.error or f"{c.value:.3e} {c.relation} {c.tolerance:g}"
            lines.append(f"{tag}  {c.name}: {msg}")
        lines.append(f"{self.subcommand}: {'PASS' if self.passed else 'FAIL'} "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks)")
        return "\n".join(lines)
