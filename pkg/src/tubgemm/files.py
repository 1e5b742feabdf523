"""Integer-matrix CSV files and the JSON sidecar carrying operand format."""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

import numpy as np

from .errors import TraceFormatError

SIDECAR_KEYS = (
    "bitwidth",
    "polarity",
    "unary_base",
    "step_overhead_cycles",
    "epilogue_cycles",
    "acc_width",
)


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    """One matrix row per line, comma separated; blank lines are ignored."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([int(c) for c in row])
            except ValueError:
                raise TraceFormatError(f"{path}:{lineno}: non-integer entry in {row}") from None
            if len(rows[-1]) != len(rows[0]):
                raise TraceFormatError(
                    f"{path}:{lineno}: {len(rows[-1])} columns, expected {len(rows[0])}"
                )
    if not rows:
        raise TraceFormatError(f"{path}: no matrix rows")
    return np.array(rows, dtype=np.int64)


def format_matrix(mat) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(mat).tolist():
        w.writerow(row)
    return buf.getvalue()


def write_matrix(mat, path: str | os.PathLike) -> None:
    Path(path).write_text(format_matrix(mat))


def read_sidecar(path: str | os.PathLike) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise TraceFormatError(f"{path}: expected a JSON object")
    unknown = set(doc) - set(SIDECAR_KEYS) - {"schema"}
    if unknown:
        raise TraceFormatError(f"{path}: unknown keys {sorted(unknown)}")
    return {k: doc[k] for k in SIDECAR_KEYS if k in doc}
