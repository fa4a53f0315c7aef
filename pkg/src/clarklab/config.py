"""Experiment configuration: JSON files with a schema version, defaults per subcommand.

A config file looks like

    {"schema_version": 1,
     "subcommand": "clark-verify",
     "measure": {"preset": "three_atom"},
     "params": {"gamma": [[0.3, 0.0]], "route": "all"},
     "tolerances": {"routes": 1e-7},
     "seed": 0,
     "output": "out"}

Command-line flags override file values.  Errors carry the offending field
and, when the value came from a file, its line number.
"""
from __future__ import annotations

import copy
import json
import os
import re
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

SUBCOMMANDS = ("spectrum-scan", "clark-verify", "regularize", "schur-test",
               "model-check", "dissipative", "acceptance")

DEFAULTS = {
    "spectrum-scan": {
        "measure": "two_atom",
        "params": {"alpha": [1.0, 2.0], "gamma": []},
        "tolerances": {"secular": 1e-10, "aronszajn_krein": 1e-10},
    },
    "clark-verify": {
        "measure": "three_atom",
        "params": {"gamma": [0.3], "alpha": [], "route": "all", "N": None, "samples": 3},
        "tolerances": {"routes": 1e-7, "gram": 1e-9, "intertwining": 1e-8,
                       "round_trip": 1e-6, "norm": 1e-9, "membership": 1e-6},
    },
    "regularize": {
        "measure": {"preset": "atoms", "points": [-1.0, -0.3, 0.4, 1.2], "normalize": True},
        "params": {"alpha": [1.0], "kernel": "hilbert", "family": "cauchy",
                   "eps_exponents": [0, 20], "target": None},
        "tolerances": {"bound": 1e-6, "tail_ratio": 1.05},
    },
    "schur-test": {
        "measure": None,
        "params": {"kernel": "hilbert", "pairs": 20, "p": 2.0, "trials": 16,
                   "multiplier": None, "r": [0.5, 0.9, 2.0]},
        "tolerances": {"coefficients": 1e-12},
    },
    "model-check": {
        "measure": "three_atom",
        "params": {"gamma": [0.3, [0.0, 0.5]], "N": None},
        "tolerances": {"theta_at_0": 1e-12, "norm_equality": 1e-8,
                       "compressed_shift": 1e-8, "moore_penrose": 1e-8},
    },
    "dissipative": {
        "measure": "two_atom",
        "params": {"alpha": [[0.5, 1.0]], "N": 512},
        "tolerances": {"cayley": 1e-10, "routes": 1e-7, "gram": 1e-9},
    },
    "acceptance": {
        "measure": None,
        "params": {"only": None},
        "tolerances": {},
    },
}

TOP_LEVEL = {"schema_version", "subcommand", "measure", "params", "tolerances",
             "seed", "output", "jobs"}


class ConfigError(ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 column: int | None = None):
        self.field, self.line, self.column = field, line, column
        where = []
        if line is not None:
            where.append(f"line {line}" + (f", column {column}" if column else ""))
        if field:
            where.append(f"field '{field}'")
        super().__init__(("config error at " + ", ".join(where) + ": " if where
                          else "config error: ") + message)


@dataclass
class ExperimentConfig:
    subcommand: str
    measure: object
    params: dict
    tolerances: dict
    seed: int = 0
    output: str = "clarklab-out"
    jobs: int = 1
    source_text: str = field(default="", repr=False)

    def as_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "subcommand": self.subcommand,
                "measure": self.measure, "params": self.params, "tolerances": self.tolerances,
                "seed": self.seed}


def _line_of(text: str, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_file(path: str) -> tuple[dict, str]:
    if not os.path.exists(path):
        raise ConfigError(f"file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, line=e.lineno, column=e.colno) from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object", line=1)
    if "schema_version" not in doc:
        raise ConfigError("missing schema_version", field="schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc['schema_version']!r}; expected {SCHEMA_VERSION}",
                          field="schema_version", line=_line_of(text, "schema_version"))
    for k in doc:
        if k not in TOP_LEVEL:
            raise ConfigError(f"unknown key; allowed: {sorted(TOP_LEVEL)}", field=k, line=_line_of(text, k))
    return doc, text


def build(subcommand: str | None, file_doc: dict | None = None, overrides: dict | None = None,
          source_text: str = "") -> ExperimentConfig:
    """Defaults, then the file, then command-line overrides; validated."""
    file_doc = file_doc or {}
    sub = subcommand or file_doc.get("subcommand")
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {sub!r}; choose from {list(SUBCOMMANDS)}",
                          field="subcommand", line=_line_of(source_text, "subcommand"))
    if file_doc.get("subcommand") not in (None, sub):
        raise ConfigError(f"file is for {file_doc['subcommand']!r}, not {sub!r}",
                          field="subcommand", line=_line_of(source_text, "subcommand"))
    base = copy.deepcopy(DEFAULTS[sub])
    merged = {"measure": base["measure"], "params": base["params"], "tolerances": base["tolerances"],
              "seed": 0, "output": "clarklab-out", "jobs": 1}
    for layer in (file_doc, overrides or {}):
        for k, v in layer.items():
            if k in ("params", "tolerances"):
                if not isinstance(v, dict):
                    raise ConfigError("must be an object", field=k, line=_line_of(source_text, k))
                for kk, vv in v.items():
                    if kk not in merged[k]:
                        raise ConfigError(f"unknown entry; allowed: {sorted(merged[k])}",
                                          field=f"{k}.{kk}", line=_line_of(source_text, kk))
                    merged[k][kk] = vv
            elif k in merged:
                merged[k] = v
    cfg = ExperimentConfig(sub, merged["measure"], merged["params"], merged["tolerances"],
                           merged["seed"], merged["output"], merged["jobs"], source_text)
    validate(cfg)
    return cfg


def parse_complex(v, name: str = "value", text: str = "") -> complex:
    """Accepts a number, [re, im], or the string 're,im'."""
    try:
        if isinstance(v, str):
            parts = v.split(",")
            if len(parts) == 1:
                return complex(float(parts[0]))
            if len(parts) == 2:
                return complex(float(parts[0]), float(parts[1]))
            raise ValueError
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError
            return complex(float(v[0]), float(v[1]))
        if isinstance(v, bool):
            raise ValueError
        return complex(float(v))
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read {v!r} as a number or 're,im' pair", field=name,
                          line=_line_of(text, name.split(".")[-1])) from None


def validate(cfg: ExperimentConfig) -> None:
    t = cfg.source_text
    p = cfg.params

    def err(msg, fld):
        raise ConfigError(msg, field=fld, line=_line_of(t, fld.split(".")[-1]))

    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        err("seed must be a non-negative integer", "seed")
    if not isinstance(cfg.jobs, int) or cfg.jobs < 1:
        err("jobs must be a positive integer", "jobs")
    for k, v in cfg.tolerances.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            err("tolerances must be positive numbers", f"tolerances.{k}")
    m = cfg.measure
    if isinstance(m, dict) and "file" in m and not os.path.exists(str(m["file"])):
        err(f"measure file not found: {m['file']}", "measure.file")

    sub = cfg.subcommand
    if sub == "spectrum-scan":
        for k in ("alpha", "gamma"):
            if not isinstance(p[k], list):
                err("must be a list", f"params.{k}")
        if not p["alpha"] and not p["gamma"]:
            err("alpha list is empty", "params.alpha")
        for v in p["alpha"]:
            if parse_complex(v, "params.alpha", t).imag != 0:
                err("alpha must be real for the self-adjoint family", "params.alpha")
        for v in p["gamma"]:
            if abs(abs(parse_complex(v, "params.gamma", t)) - 1) > 1e-12:
                err("gamma must be unimodular for a spectral measure", "params.gamma")
    elif sub == "clark-verify":
        if not isinstance(p["gamma"], list) or not p["gamma"]:
            err("gamma list is empty", "params.gamma")
        for v in p["gamma"]:
            if abs(parse_complex(v, "params.gamma", t)) >= 1:
                err("gamma must lie in the open unit disc", "params.gamma")
        if not isinstance(p["alpha"], list):
            err("must be a list", "params.alpha")
        for v in p["alpha"]:
            if abs(abs(parse_complex(v, "params.alpha", t)) - 1) > 1e-12:
                err("alpha must be unimodular", "params.alpha")
        if p["route"] not in ("universal", "snf", "dbr", "all"):
            err("route must be one of universal, snf, dbr, all", "params.route")
        _positive_int(p["samples"], "params.samples", err)
        if p["N"] is not None:
            _positive_int(p["N"], "params.N", err)
    elif sub == "regularize":
        if not isinstance(p["alpha"], list) or not p["alpha"]:
            err("alpha list is empty", "params.alpha")
        for v in p["alpha"]:
            a = parse_complex(v, "params.alpha", t)
            if a.imag != 0 or a.real == 0:
                err("alpha must be real and nonzero", "params.alpha")
        from .sio import FAMILIES, NAMED_KERNELS
        if p["kernel"] not in NAMED_KERNELS:
            err(f"unknown kernel; choose from {sorted(NAMED_KERNELS)}", "params.kernel")
        if p["family"] not in FAMILIES:
            err(f"unknown family; choose from {list(FAMILIES)}", "params.family")
        e = p["eps_exponents"]
        if (not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, int) for x in e)
                or e[1] < e[0]):
            err("eps_exponents must be [lo, hi] integers with lo <= hi", "params.eps_exponents")
    elif sub == "schur-test":
        if p["kernel"] not in ("hilbert", "cauchy_line", "cauchy_circle"):
            err("schur-test kernels: hilbert, cauchy_line, cauchy_circle", "params.kernel")
        _positive_int(p["pairs"], "params.pairs", err)
        _positive_int(p["trials"], "params.trials", err)
        if not isinstance(p["p"], (int, float)) or not 1 < p["p"] < float("inf"):
            err("p must be a number in (1, inf)", "params.p")
        if not isinstance(p["r"], list) or not p["r"]:
            err("r grid is empty", "params.r")
        for r in p["r"]:
            if not isinstance(r, (int, float)) or r <= 0 or r == 1:
                err("radii must be positive and different from 1", "params.r")
        M = p["multiplier"]
        if M is not None:
            if not isinstance(M, dict) or not {"positions", "weights"} <= set(M):
                err("multiplier needs positions and weights", "params.multiplier")
            if len(M["positions"]) != len(M["weights"]) or not M["positions"]:
                err("positions and weights must be nonempty and of equal length", "params.multiplier")
    elif sub == "model-check":
        if not isinstance(p["gamma"], list) or not p["gamma"]:
            err("gamma list is empty", "params.gamma")
        for v in p["gamma"]:
            if abs(parse_complex(v, "params.gamma", t)) >= 1:
                err("gamma must lie in the open unit disc", "params.gamma")
        if p["N"] is not None:
            _positive_int(p["N"], "params.N", err)
    elif sub == "dissipative":
        if not isinstance(p["alpha"], list) or not p["alpha"]:
            err("alpha list is empty", "params.alpha")
        for v in p["alpha"]:
            if parse_complex(v, "params.alpha", t).imag < 0:
                err("alpha must have Im alpha >= 0", "params.alpha")
        _positive_int(p["N"], "params.N", err)
    elif sub == "acceptance":
        only = p["only"]
        if only is not None:
            if not isinstance(only, list) or not only or not all(
                    isinstance(k, int) and 1 <= k <= 9 for k in only):
                err("only must be a nonempty list of criterion numbers 1-9", "params.only")


def _positive_int(v, name, err):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        err("must be a positive integer", name)
