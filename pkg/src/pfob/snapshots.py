"""Binary field snapshots and the diagnostics CSV writer.

Snapshot layout (little-endian): magic "PFOB", version u32, nx u32, ny u32,
then h, eps, t as float64, then ny*nx float64 cell values row-major (row = y).
CSV values are written with 17 significant digits so reruns are byte-identical.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS

MAGIC = b"PFOB"
VERSION = 1
_HEADER = struct.Struct("<4sIII ddd".replace(" ", ""))


class SnapshotFormatError(ValueError):
    """Bad magic, version, or truncated snapshot payload."""


def write_snapshot(path: str | Path, u: np.ndarray, h: float, eps: float,
                   t: float) -> None:
    ny, nx = u.shape
    payload = np.ascontiguousarray(u, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, nx, ny, h, eps, t))
        fh.write(payload)


def read_snapshot(path: str | Path):
    """Returns (u, h, eps, t); raises SnapshotFormatError on a bad file."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError("snapshot truncated before header end")
    magic, version, nx, ny, h, eps, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    expect = _HEADER.size + 8 * nx * ny
    if len(raw) != expect:
        raise SnapshotFormatError(
            f"snapshot payload is {len(raw) - _HEADER.size} bytes, "
            f"expected {8 * nx * ny}")
    u = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(ny, nx).copy()
    return u, h, eps, t


def format_value(x: float) -> str:
    return f"{x:.17g}"


def write_diagnostics_csv(path: str | Path, records) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(format_value(v) for v in rec.row()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_diagnostics_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Column-name -> values; tolerant of extra columns, strict on missing ones."""
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty diagnostics file")
    header = text[0].split(",")
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ValueError(f"{path}: missing required columns {missing}")
    rows = [line.split(",") for line in text[1:] if line]
    data = np.array([[float(v) for v in row] for row in rows]) if rows else \
        np.zeros((0, len(header)))
    return {name: data[:, i] if rows else np.array([])
            for i, name in enumerate(header)}
