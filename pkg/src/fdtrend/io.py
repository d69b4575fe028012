"""CSV/JSON serialization of samples, trend estimates, bands and reports.

Sample files are "wide": a header row ``t,t_1,...,t_p`` followed by one row
of ``p`` observations per curve. Comment lines start with ``#``; a comment
of the form ``# T=<value>`` sets the horizon (default: last grid value).
Floats are written with ``repr`` so that reading them back is bit-exact.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .bands import ConfidenceBand
from .design import DesignGrid, FunctionalSample, validate_grid
from .errors import FdtrendError, ParseError
from .estimators import TrendEstimate

_HORIZON_RE = re.compile(r"^#\s*T\s*=\s*(\S+)\s*$")


def fmt(x) -> str:
    """Shortest decimal string that parses back to the same double."""
    return repr(float(x))


def _rows(path):
    """Yield (row_number, line_number, fields) for non-comment rows, plus horizon metadata."""
    horizon = None
    rows = []
    with open(path, newline="") as fh:
        row_no = 0
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                m = _HORIZON_RE.match(stripped)
                if m:
                    try:
                        horizon = float(m.group(1))
                    except ValueError:
                        raise ParseError(f"line {line_no}: invalid horizon {m.group(1)!r}") from None
                continue
            row_no += 1
            rows.append((row_no, line_no, next(csv.reader([stripped]))))
    return rows, horizon


def _floats(fields, row_no, line_no):
    try:
        return [float(f) for f in fields]
    except ValueError:
        bad = next(f for f in fields if not _is_float(f))
        raise ParseError(f"row {row_no} (line {line_no}): non-numeric field {bad!r}") from None


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_sample(path) -> FunctionalSample:
    """Load a wide-format sample file.

    Grid quality problems (a large quasi-uniformity ratio) are reported
    through :mod:`warnings`, not raised.
    """
    rows, horizon = _rows(path)
    if not rows:
        raise ParseError(f"{path}: no header row")
    row_no, line_no, header = rows[0]
    if not header or header[0].strip().lower() != "t":
        raise ParseError(f"row {row_no} (line {line_no}): header must start with 't'")
    pts = _floats(header[1:], row_no, line_no)
    try:
        grid = DesignGrid(np.array(pts), horizon)
    except FdtrendError as exc:
        raise ParseError(f"row {row_no} (line {line_no}): {exc}") from None
    p = grid.p
    data = []
    for row_no, line_no, fields in rows[1:]:
        if len(fields) != p:
            raise ParseError(f"row {row_no} (line {line_no}): expected {p} fields, got {len(fields)}")
        data.append(_floats(fields, row_no, line_no))
    if not data:
        raise ParseError(f"{path}: no curve rows")
    try:
        sample = FunctionalSample(np.array(data), grid)
    except FdtrendError as exc:
        raise ParseError(f"{path}: {exc}") from None
    validate_grid(grid)
    return sample


def write_sample(sample: FunctionalSample, path=None, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"# T={fmt(sample.grid.horizon)}")
    lines.append(",".join(["t"] + [fmt(x) for x in sample.grid.points]))
    lines.extend(",".join(fmt(x) for x in row) for row in sample.data)
    text = "\n".join(lines) + "\n"
    if path is not None and str(path) != "-":
        Path(path).write_text(text)
    return text


def _write_columns(path, names, columns):
    lines = [",".join(names)]
    for vals in zip(*columns):
        lines.append(",".join(fmt(v) for v in vals))
    text = "\n".join(lines) + "\n"
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text)
    return text


def _read_columns(path, names):
    rows, _ = _rows(path)
    if not rows or [f.strip() for f in rows[0][2]] != list(names):
        raise ParseError(f"{path}: expected header {','.join(names)}")
    out = []
    for row_no, line_no, fields in rows[1:]:
        if len(fields) != len(names):
            raise ParseError(f"row {row_no} (line {line_no}): expected {len(names)} fields")
        out.append(_floats(fields, row_no, line_no))
    return np.array(out, dtype=float).reshape(-1, len(names)).T


def write_trend(trend: TrendEstimate, path=None) -> str:
    return _write_columns(path, ("t", "estimate"), (trend.eval_grid, trend.values))


def read_trend(path):
    """Return ``(t, estimate)`` arrays."""
    return tuple(_read_columns(path, ("t", "estimate")))


def band_header(band: ConfidenceBand, trend: TrendEstimate, **extra) -> dict:
    head = {
        "gamma": band.gamma,
        "level": band.level,
        "kind": band.kind,
        "n": band.n,
        "method": trend.config.method,
        "h": trend.config.bandwidth,
        "kernel": trend.config.kernel.name,
        "radius": band.radius,
        "eval_points": int(band.eval_grid.size),
    }
    head.update(extra)
    return head


def write_band(band: ConfidenceBand, path, header: dict | None = None) -> Path:
    """Write the band CSV to ``path`` and its JSON header next to it (``.json`` suffix)."""
    path = Path(path)
    _write_columns(path, ("t", "center", "lower", "upper"), (band.eval_grid, band.center, band.lower, band.upper))
    json_path = path.with_suffix(".json")
    write_json(header if header is not None else {"gamma": band.gamma, "n": band.n, "kind": band.kind}, json_path)
    return json_path


def read_band(path):
    """Return ``(t, center, lower, upper)`` arrays."""
    return tuple(_read_columns(path, ("t", "center", "lower", "upper")))


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(obj, path=None) -> str:
    text = to_json(obj)
    if path is not None and str(path) != "-":
        Path(path).write_text(text)
    return text


def write_sup_deviations(values, path):
    _write_columns(path, ("replication", "sup_deviation"), (range(len(values)), values))
