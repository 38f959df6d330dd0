"""On-disk formats: field CSV, little-endian field dumps, trajectory directories."""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .spectral_core import Field, Grid1D

_HEADER = struct.Struct("<Qd")


def write_field_csv(f: Field, path: str | Path) -> None:
    """Columns x, re, im; x_min is recoverable from the first row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "re", "im"])
        for xj, uj in zip(f.x, f.samples):
            w.writerow([repr(float(xj)), repr(float(uj.real)), repr(float(uj.imag))])


def read_field_csv(path: str | Path, box_length: float, real: bool = False) -> Field:
    """The box length cannot be inferred from samples alone, so it is passed in."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    grid = Grid1D(len(data), box_length, float(data[0, 0]))
    return Field(grid, data[:, 1] + 1j * data[:, 2], real)


def write_field_binary(f: Field, path: str | Path) -> None:
    """Header u64 num_points, f64 box_length; payload interleaved (re, im) f64 pairs."""
    payload = np.empty(2 * f.grid.num_points, dtype="<f8")
    payload[0::2] = f.samples.real
    payload[1::2] = f.samples.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.grid.num_points, f.grid.box_length))
        fh.write(payload.tobytes())


def read_field_binary(path: str | Path, x_min: float | None = None, real: bool = False) -> Field:
    raw = Path(path).read_bytes()
    n, box = _HEADER.unpack_from(raw)
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if payload.size != 2 * n:
        raise ValueError(f"{path}: expected {2 * n} doubles, found {payload.size}")
    return Field(Grid1D(int(n), box, x_min), payload[0::2] + 1j * payload[1::2], real)


def write_manifest(path: str | Path, entries: dict) -> None:
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")


def read_manifest(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
