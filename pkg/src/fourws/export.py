"""Delimited outputs: traces, metrics tables and stability charts.

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back gives the same doubles. Metadata goes in leading ``# key=value``
comment lines.
"""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .sim import METRIC_FIELDS, TRACE_COLUMNS, Metrics, Trace

METRICS_COLUMNS = (
    "label",
    "a",
    "lambda0",
    "feedforward",
    "speed",
    "kappa",
    "k1",
    "k2",
    "status",
) + METRIC_FIELDS + ("detail",)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _render(header, rows, meta=None) -> str:
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text_atomic(path, text: str) -> Path:
    """Write through a temporary file so an interrupted run leaves no partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def trace_csv(trace: Trace, meta=None) -> str:
    cols = [getattr(trace, name) for name in TRACE_COLUMNS]
    rows = zip(*(c.tolist() for c in cols))
    return _render(TRACE_COLUMNS, rows, {**trace.meta, **(meta or {})})


def _parse_meta_value(text):
    if text in ("true", "false"):
        return text == "true"
    try:
        return float(text)
    except ValueError:
        return text


def read_trace(path) -> Trace:
    meta, body = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = _parse_meta_value(value)
            else:
                body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    if tuple(header) != TRACE_COLUMNS:
        raise ValueError(f"{path}: unexpected trace header {header}")
    data = np.array([[float(v) for v in row] for row in reader], dtype=float)
    data = data.reshape(-1, len(TRACE_COLUMNS))
    return Trace(*(data[:, i].copy() for i in range(len(TRACE_COLUMNS))), meta=meta)


def metrics_row(label, info, metrics: Metrics | None, status="ok", detail=""):
    values = [
        label,
        info.get("a"),
        info.get("lambda0"),
        info.get("feedforward"),
        info.get("speed"),
        info.get("kappa"),
        info.get("k1"),
        info.get("k2"),
        status,
    ]
    values += [getattr(metrics, name) if metrics else None for name in METRIC_FIELDS]
    return values + [detail]


def metrics_csv(rows, meta=None) -> str:
    return _render(METRICS_COLUMNS, rows, meta)


def read_metrics(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def chart_csv(grid, meta=None) -> str:
    """Same text as rendering ``grid.iter_cells()``; axis values are formatted once."""
    head = _render(("k1", "k2", "class"), (), meta)
    k1 = [fmt(float(v)) for v in grid.k1]
    k2 = [fmt(float(v)) for v in grid.k2]
    cells = grid.cells.astype(int).tolist()
    body = "".join(
        f"{a},{b},{c}\n" for a, row in zip(k1, cells) for b, c in zip(k2, row)
    )
    return head + body


def boundary_csv(curves, meta=None) -> str:
    rows = ((name, k1, k2) for name, pts in curves.items() for k1, k2 in pts.tolist())
    return _render(("curve_id", "k1", "k2"), rows, meta)


def gain_points_csv(points, meta=None) -> str:
    """``points``: iterable of (lambda0, k1, k2, status)."""
    return _render(("lambda0", "k1", "k2", "status"), points, meta)
