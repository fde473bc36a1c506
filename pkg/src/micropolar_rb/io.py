"""Snapshot and CSV output.

Snapshot layout: one UTF-8 JSON header line
``{"dtype": "f64-le", "field_name", "layout": "row-major", "length", "n", "time"}``
followed by n*n little-endian float64 values of the physical field.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .spectral import Grid, PhysicalField


def write_snapshot(path, field: PhysicalField, field_name: str, time: float) -> None:
    header = {
        "n": field.grid.n,
        "length": field.grid.length,
        "field_name": field_name,
        "time": float(time),
        "layout": "row-major",
        "dtype": "f64-le",
    }
    data = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(data.tobytes(order="C"))


def read_snapshot(path) -> tuple[PhysicalField, dict]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    if header.get("layout") != "row-major" or header.get("dtype") != "f64-le":
        raise ValueError(f"unsupported snapshot layout/dtype in {path}")
    n = int(header["n"])
    values = np.frombuffer(raw, dtype="<f8")
    if values.size != n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {values.size}")
    grid = Grid(n, float(header["length"]))
    return PhysicalField(grid, values.reshape(n, n).astype(float)), header


def format_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, columns: Sequence[str], rows: Iterable[dict]) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_cell(row.get(c)) for c in columns])
