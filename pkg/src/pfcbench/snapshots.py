"""Field snapshot files: a small binary format plus a CSV export.

Binary layout (little-endian throughout):

    8 bytes   magic ``b"PFSNAP01"``
    float64   L
    int64     N
    float64   origin
    float64   t (simulation time of the snapshot)
    N*N float64 values, row-major (first index x, second y)
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .spectral import Grid2D, PeriodicField

MAGIC = b"PFSNAP01"
_HEADER = struct.Struct("<8sdqdd")

__all__ = ["MAGIC", "write_snapshot", "read_snapshot", "export_csv", "read_header"]


class SnapshotFormatError(ValueError):
    """Raised on a malformed or mislabelled snapshot file."""


def write_snapshot(path: str | Path, field: PeriodicField, t: float) -> None:
    grid = field.grid
    header = _HEADER.pack(MAGIC, grid.L, grid.N, grid.origin, float(t))
    data = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_header(path: str | Path) -> tuple[Grid2D, float]:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header")
    magic, L, N, origin, t = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    return Grid2D(L=L, N=int(N), origin=origin), t


def read_snapshot(path: str | Path) -> tuple[PeriodicField, float]:
    grid, t = read_header(path)
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != grid.N * grid.N:
        raise SnapshotFormatError(
            f"{path}: expected {grid.N * grid.N} values, found {data.size}"
        )
    values = data.reshape(grid.N, grid.N).astype(np.float64)
    return PeriodicField(grid, values), t


def export_csv(path: str | Path, field: PeriodicField) -> None:
    """Write (x, y, value) rows, row-major over the grid."""
    X, Y = field.grid.meshgrid()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "value"])
        for xi, yi, vi in zip(X.ravel(), Y.ravel(), field.values.ravel()):
            writer.writerow([f"{xi:.17g}", f"{yi:.17g}", f"{vi:.17g}"])
