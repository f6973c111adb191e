"""Report container and deterministic JSON/CSV serialisation.

Floats are written with 17 significant digits so every value round-trips;
no timestamps, hostnames or thread counts are ever written, which makes
identical jobs produce identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _plain(v):
    """numpy scalars and arrays to Python values."""
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    return v


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    obj = _plain(obj)
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else json.dumps(fmt_float(obj))
    if isinstance(obj, complex):
        return to_json([obj.real, obj.imag], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(_plain(x), (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(to_json(x, indent, _level + 1) for x in obj) + "]"
        items = [inner + to_json(x, indent, _level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


@dataclass
class Report:
    command: str
    job: dict
    columns: list[str] = field(default_factory=list)
    records: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    passed: bool | None = None

    @property
    def exit_code(self) -> int:
        return 1 if self.passed is False else 0

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "job": self.job,
            "passed": self.passed,
            "summary": self.summary,
            "columns": self.columns,
            "records": self.records,
        }

    def to_json(self) -> str:
        return to_json(self.as_dict()) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.records:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def render(self, emit: str) -> str:
        if emit == "json":
            return self.to_json()
        if emit == "csv":
            return self.to_csv()
        raise ValueError(f"unknown output format {emit!r}")


def columns_from_arrays(arrays: dict) -> tuple[list[str], list[list]]:
    cols = list(arrays)
    n = len(next(iter(arrays.values()))) if arrays else 0
    data = [_plain(np.asarray(arrays[c])) if isinstance(arrays[c], np.ndarray) else list(arrays[c]) for c in cols]
    return cols, [[data[j][i] for j in range(len(cols))] for i in range(n)]
