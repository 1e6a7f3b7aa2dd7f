"""Readers for the run artifacts: diagnostics CSV, sweep CSV, PFOB snapshots.

These parse the on-disk formats directly; the figure layer never recomputes
physics, every rendered number comes from the files.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

DIAGNOSTICS_COLUMNS = [
    "t", "energy", "mu_total", "xi_total_abs", "xi_sup", "grad_sup",
    "density_ratio_max", "interface_length", "mass_balance_residual",
    "obstacle_mass", "min_gap_sub", "min_gap_super", "obstacle_dev",
]

SWEEP_REQUIRED = ["eps", "status", "xi_time_integral", "energy_monotone"]

_SNAPSHOT_HEADER = struct.Struct("<4sIIIddd")
SNAPSHOT_MAGIC = b"PFOB"
SNAPSHOT_VERSION = 1


class SchemaError(ValueError):
    """Input file does not match the expected artifact schema."""


def read_diagnostics(path) -> dict[str, np.ndarray]:
    """Diagnostics CSV -> column dict; extra columns tolerated, missing rejected."""
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    missing = [c for c in DIAGNOSTICS_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required columns {missing}")
    rows = [ln.split(",") for ln in lines[1:]]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array([[float(v) for v in row] for row in rows])
    return {name: data[:, i] for i, name in enumerate(header)}


def read_sweep(path) -> tuple[list[dict], float]:
    """Sweep CSV -> (rows of ok runs, fitted log-log slope from the trailer)."""
    raw = Path(path).read_text().splitlines()
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    missing = [c for c in SWEEP_REQUIRED if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required columns {missing}")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        row = dict(zip(header, cells))
        rows.append(row)
    slope = float("nan")
    for ln in raw:
        if ln.startswith("# loglog_slope,"):
            slope = float(ln.split(",", 1)[1])
    return rows, slope


def read_snapshot(path):
    """PFOB snapshot -> (u, h, eps, t); strict on magic/version/size."""
    raw = Path(path).read_bytes()
    if len(raw) < _SNAPSHOT_HEADER.size:
        raise SchemaError(f"{path}: truncated before header end")
    magic, version, nx, ny, h, eps, t = _SNAPSHOT_HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise SchemaError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SchemaError(f"{path}: unsupported version {version}")
    if len(raw) != _SNAPSHOT_HEADER.size + 8 * nx * ny:
        raise SchemaError(f"{path}: payload size mismatch")
    u = np.frombuffer(raw, dtype="<f8",
                      offset=_SNAPSHOT_HEADER.size).reshape(ny, nx)
    return u, h, eps, t


def read_manifest(path) -> dict:
    import yaml
    return yaml.safe_load(Path(path).read_text())


def sibling_manifest(artifact_path) -> dict | None:
    cand = Path(artifact_path).parent / "manifest.yaml"
    if cand.exists():
        try:
            return read_manifest(cand)
        except Exception:
            return None
    return None


def energy_monotone_verdict(data: dict[str, np.ndarray]) -> tuple[bool, float]:
    """Same rule the run acceptance uses: rises above 1e-10 |E0| are violations."""
    en = data["energy"]
    if len(en) < 2:
        return True, 0.0
    rises = np.diff(en)
    slack = 1e-10 * abs(en[0])
    return bool(np.all(rises <= slack)), float(np.max(rises))
