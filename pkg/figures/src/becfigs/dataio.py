"""Readers for the simulator's persisted dataset formats.

Implemented against the documented on-disk layout only (no coupling to the
simulator package):

array block:   b"DBEC" | u32 version | u16 dtype | u16 ndim | ndim*u64 shape
               | 16s units | 32s config sha | payload (little endian,
               row major; dtype 0=f8, 1=c16, 2=i8)
dataset file:  b"DBED" | u32 version | u32 count | count * (u16 len | name
               | array block)
table csv:     optional "# config_hash=..." comment, header row, then
               comma-separated %.17g floats
matrix csv:    first row/column carry site coordinates, corner is nan
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<c16"), 2: np.dtype("<i8")}


def _read_array(buf):
    magic = buf.read(4)
    if magic != b"DBEC":
        raise ValueError(f"bad array magic {magic!r}")
    version, code, ndim = struct.unpack("<IHH", buf.read(8))
    if version != 1:
        raise ValueError(f"unsupported version {version}")
    shape = struct.unpack(f"<{ndim}Q", buf.read(8 * ndim))
    units = buf.read(16).rstrip(b"\0").decode("ascii")
    sha = buf.read(32)
    dt = _DTYPES[code]
    n = int(np.prod(shape, dtype=np.int64)) if ndim else 1
    arr = np.frombuffer(buf.read(n * dt.itemsize), dtype=dt).reshape(shape).copy()
    return arr, units, sha


def read_dataset(path) -> dict:
    """{name: array} from a binary dataset file."""
    with open(path, "rb") as f:
        if f.read(4) != b"DBED":
            raise ValueError(f"{path}: not a dataset file")
        version, count = struct.unpack("<II", f.read(8))
        if version != 1:
            raise ValueError(f"unsupported version {version}")
        out = {}
        for _ in range(count):
            (ln,) = struct.unpack("<H", f.read(2))
            name = f.read(ln).decode("utf-8")
            out[name], _, _ = _read_array(f)
    return out


def read_table_csv(path) -> dict:
    with open(path) as f:
        line = f.readline()
        if line.startswith("#"):
            line = f.readline()
        names = [s.strip() for s in line.strip().split(",")]
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}


def read_matrix_csv(path):
    """(coords, matrix) from a square matrix export."""
    rows = np.loadtxt(path, delimiter=",", comments="#")
    return rows[0, 1:], rows[1:, 1:]


def load(path) -> dict:
    """Dispatch on suffix; csv matrices come back as {'x':..., 'g2':...}."""
    path = Path(path)
    if path.suffix == ".bin":
        return read_dataset(path)
    head = path.read_text().splitlines()
    first = head[1] if head[0].startswith("#") else head[0]
    try:
        float(first.split(",")[0])       # matrix corner is nan, tables have names
    except ValueError:
        return read_table_csv(path)
    x, m = read_matrix_csv(path)
    return {"x": x, "g2": m}
