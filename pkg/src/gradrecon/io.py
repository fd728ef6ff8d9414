"""CSV readers and writers for signals, masks, traces and sweep tables.

Floats are written with 17 significant digits so every value survives a
write/read round trip bit-exactly.
"""

from __future__ import annotations

import csv
import io
import os
import sys
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .signal import SamplingMask, as_signal

PathLike = Union[str, os.PathLike]

SIGNAL_HEADER = ["index", "value"]
MASK_HEADER = ["index", "available"]
TRACE_HEADER = ["iteration", "measure", "mae", "d", "mu"]
OVERLAY_HEADER = ["index", "original", "noisy", "available", "reconstructed"]


class CSVFormatError(ValueError):
    """A CSV file is readable but does not follow the expected layout."""


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return ""
    return format(v, ".17g")


def _read_rows(path: PathLike, header: Sequence[str]) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != list(header):
        got = ",".join(rows[0]) if rows else "<empty file>"
        raise CSVFormatError(f"{path}: expected header {','.join(header)!r}, got {got!r}")
    body = [r for r in rows[1:] if r]
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise CSVFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(r)}")
    return body


def _check_index_column(path, indices: list[int]):
    if indices != list(range(len(indices))):
        raise CSVFormatError(f"{path}: index column must run 0..N-1 in order")


def write_table(path: Optional[PathLike], header: Sequence[str], rows: Iterable[Sequence], stream: Optional[IO] = None):
    """Write ``rows`` under ``header`` to ``path``, or to ``stream`` when ``path`` is None."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if not isinstance(v, str) else v for v in r])
    text = buf.getvalue()
    if path is None:
        (stream or sys.stdout).write(text)
        return
    # write-then-rename so a failed run never leaves a truncated file behind
    tmp = f"{os.fspath(path)}.partial"
    try:
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_signal(path: Optional[PathLike], signal, stream: Optional[IO] = None):
    x = np.asarray(signal, dtype=float)
    write_table(path, SIGNAL_HEADER, ((i, v) for i, v in enumerate(x)), stream)


def read_signal(path: PathLike) -> np.ndarray:
    body = _read_rows(path, SIGNAL_HEADER)
    try:
        idx = [int(r[0]) for r in body]
        vals = [float(r[1]) for r in body]
    except ValueError as exc:
        raise CSVFormatError(f"{path}: {exc}") from exc
    _check_index_column(path, idx)
    try:
        return as_signal(vals)
    except ValueError as exc:
        raise CSVFormatError(f"{path}: {exc}") from exc


def write_mask(path: Optional[PathLike], mask: SamplingMask, stream: Optional[IO] = None):
    write_table(path, MASK_HEADER, ((i, int(a)) for i, a in enumerate(mask.available)), stream)


def read_mask(path: PathLike) -> SamplingMask:
    body = _read_rows(path, MASK_HEADER)
    try:
        idx = [int(r[0]) for r in body]
        flags = [int(r[1]) for r in body]
    except ValueError as exc:
        raise CSVFormatError(f"{path}: {exc}") from exc
    _check_index_column(path, idx)
    if any(f not in (0, 1) for f in flags):
        raise CSVFormatError(f"{path}: available column must contain only 0 or 1")
    if not flags:
        raise CSVFormatError(f"{path}: mask has no rows")
    return SamplingMask.from_available([bool(f) for f in flags])


def write_trace(path: Optional[PathLike], trace, stream: Optional[IO] = None):
    write_table(path, TRACE_HEADER, ((r.iteration, r.measure, r.mae, r.d, r.mu) for r in trace), stream)


def read_table(path: PathLike, header: Sequence[str]) -> list[dict[str, str]]:
    """Read any of the package's CSV tables as a list of string dicts."""
    return [dict(zip(header, r)) for r in _read_rows(path, header)]
