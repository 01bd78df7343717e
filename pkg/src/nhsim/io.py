"""Binary field snapshots and CSV observable series."""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .grid import Grid, WaveField
from .observables import ObservableSeries

MAGIC = b"NHSIM1\0"
_HEADER = struct.Struct("<IIdd")


class SnapshotError(ValueError):
    pass


def encode_snapshot(u: WaveField) -> bytes:
    g = u.grid
    body = np.ascontiguousarray(u.values, dtype="<c16").tobytes(order="C")
    return MAGIC + _HEADER.pack(g.dim, g.n, g.L, float(u.time)) + body


def decode_snapshot(data: bytes) -> WaveField:
    if not data.startswith(MAGIC):
        raise SnapshotError("not an NHSIM1 snapshot (bad magic bytes)")
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise SnapshotError("truncated snapshot header")
    dim, n, L, t = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    try:
        grid = Grid(dim, n, L)
    except ValueError as exc:
        raise SnapshotError(f"invalid grid in snapshot header: {exc}") from exc
    expected = 16 * n ** dim
    if len(data) - off != expected:
        raise SnapshotError(f"snapshot body has {len(data) - off} bytes, expected {expected}")
    vals = np.frombuffer(data, dtype="<c16", offset=off).reshape(grid.shape)
    return WaveField(grid, vals.astype(np.complex128), t)


def write_snapshot(u: WaveField, path) -> Path:
    path = Path(path)
    try:
        path.write_bytes(encode_snapshot(u))
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc
    return path


def read_snapshot(path) -> WaveField:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read snapshot {path}: {exc}") from exc
    return decode_snapshot(data)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

_AXES = ("x", "y")


def series_header(dim: int) -> list[str]:
    return (["t", "mass", "energy"]
            + [f"momentum_{a}" for a in _AXES[:dim]]
            + [f"com_{a}" for a in _AXES[:dim]]
            + ["grad_norm", "weighted_norm"])


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def emit_series(series: ObservableSeries, path) -> Path:
    """Write one row per record, 17 significant digits, LF line endings."""
    path = Path(path)
    dim = series.dim
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(series_header(dim))
            for i in range(len(series)):
                row = [series.times[i], series.mass[i], series.energy[i],
                       *series.momentum[i][:dim], *series.com[i][:dim],
                       series.grad_norm[i], series.weighted_norm[i]]
                w.writerow([_fmt(float(v)) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write series {path}: {exc}") from exc
    return path


def parse_series(path) -> ObservableSeries:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file, expected a header")
    header = rows[0]
    dim = 2 if "momentum_y" in header else 1
    if header != series_header(dim):
        raise ValueError(f"{path}: unexpected header {header}")
    out = ObservableSeries(dim=dim)
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        v = [float(x) for x in row]
        out.append(v[0], v[1], v[2], v[3:3 + dim], v[3 + dim:3 + 2 * dim], v[-2], v[-1])
    return out
