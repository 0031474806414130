"""CSV and JSON serialization of run traces.

Reals are written with 17 significant digits, so reading a CSV back gives
the recorded doubles exactly.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..outer import CSV_COLUMNS, IterationRecord, RunTrace

INT_COLUMNS = {"k", "oracle_calls_cum", "oracle_calls_paper_accounting_cum", "T_k"}


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def write_trace_csv(trace: RunTrace, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in trace.rows():
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return path


def read_trace_csv(path, method: str = "unknown") -> RunTrace:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        records = []
        for row in reader:
            vals = {c: int(row[c]) if c in INT_COLUMNS else float(row[c]) for c in CSV_COLUMNS}
            records.append(IterationRecord(**vals))
    return RunTrace(method, records)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def write_metadata(meta: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return path
