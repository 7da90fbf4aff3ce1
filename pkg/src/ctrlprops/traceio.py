"""Trace file formats.

Raw traces are CSV with header ``t,<var1>,<var2>,...`` and one row per
sample (seconds, decimal floats). Quantized traces are JSON objects with
``tau``, ``specs`` and ``states`` (rows of integer grid indices).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import InputError
from .signal_model import QuantizedTrace, RawTrace


def read_csv(path) -> RawTrace:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "t" or len(header) < 2:
            raise InputError(f"{path}:1: header must be 't,<var1>,...', got {','.join(header)!r}")
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise InputError(f"{path}:{reader.line_num}: {exc}") from None
            if not all(np.isfinite(values)):
                raise InputError(f"{path}:{reader.line_num}: non-finite value")
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no samples")
    data = np.array(rows)
    try:
        return RawTrace(tuple(header[1:]), data[:, 0], data[:, 1:])
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_csv(trace: RawTrace, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t",) + trace.variables)
        for t, row in zip(trace.times, trace.samples):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def read_quantized(path) -> QuantizedTrace:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from None
    return QuantizedTrace.from_dict(data)


def write_quantized(trace: QuantizedTrace, path) -> None:
    Path(path).write_text(json.dumps(trace.to_dict()))
