"""Self-describing binary datasets and CSV exports.

Binary array block (little endian):

    magic   4 bytes  b"DBEC"
    version u32      1
    dtype   u16      0 = float64, 1 = complex128, 2 = int64
    ndim    u16
    shape   ndim * u64
    units   16 bytes ascii, null padded (axis unit tag, e.g. "xi,c0,mu0")
    confh   32 bytes sha256 of the resolved run config (zeros if unset)
    payload row-major array data

A dataset file (b"DBED" + u32 version + u32 count, then per entry a
u16 name length + utf-8 name + an array block) bundles named arrays.
CSV exports carry the config hash in a leading comment and use 17
significant digits so binary -> csv -> binary round trips are lossless
for float64.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

MAGIC_ARRAY = b"DBEC"
MAGIC_DATASET = b"DBED"
VERSION = 1

_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<c16"), 2: np.dtype("<i8")}
_DTYPE_CODES = {np.dtype("float64"): 0, np.dtype("complex128"): 1, np.dtype("int64"): 2}


def _pack_array(arr: np.ndarray, units: str, config_hash: bytes) -> bytes:
    arr = np.ascontiguousarray(arr)
    if arr.dtype not in _DTYPE_CODES:
        if np.issubdtype(arr.dtype, np.integer):
            arr = arr.astype(np.int64)
        elif np.issubdtype(arr.dtype, np.complexfloating):
            arr = arr.astype(np.complex128)
        else:
            arr = arr.astype(np.float64)
    code = _DTYPE_CODES[arr.dtype]
    head = MAGIC_ARRAY + struct.pack("<IHH", VERSION, code, arr.ndim)
    head += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    head += units.encode("ascii")[:16].ljust(16, b"\0")
    ch = (config_hash or b"")[:32].ljust(32, b"\0")
    return head + ch + arr.astype(arr.dtype.newbyteorder("<")).tobytes()


def _unpack_array(buf: io.BufferedReader):
    magic = buf.read(4)
    if magic != MAGIC_ARRAY:
        raise ValueError(f"bad array magic {magic!r}")
    version, code, ndim = struct.unpack("<IHH", buf.read(8))
    if version != VERSION:
        raise ValueError(f"unsupported format version {version}")
    shape = struct.unpack(f"<{ndim}Q", buf.read(8 * ndim))
    units = buf.read(16).rstrip(b"\0").decode("ascii")
    config_hash = buf.read(32)
    dt = _DTYPES[code]
    n = int(np.prod(shape, dtype=np.int64)) if ndim else 1
    arr = np.frombuffer(buf.read(n * dt.itemsize), dtype=dt).reshape(shape).copy()
    return arr, units, config_hash


def write_dataset(path, arrays: dict, units: str = "xi,c0,mu0",
                  config_hash: bytes = b"") -> Path:
    """Write named arrays as one self-describing binary file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    blob = MAGIC_DATASET + struct.pack("<II", VERSION, len(arrays))
    for name, arr in arrays.items():
        nb = name.encode("utf-8")
        blob += struct.pack("<H", len(nb)) + nb
        blob += _pack_array(np.asarray(arr), units, config_hash)
    path.write_bytes(blob)
    return path


def read_dataset(path) -> dict:
    """Read a dataset file back into {name: array}."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC_DATASET:
            raise ValueError(f"{path}: bad dataset magic {magic!r}")
        version, count = struct.unpack("<II", f.read(8))
        if version != VERSION:
            raise ValueError(f"unsupported format version {version}")
        out = {}
        for _ in range(count):
            (ln,) = struct.unpack("<H", f.read(2))
            name = f.read(ln).decode("utf-8")
            arr, _, _ = _unpack_array(f)
            out[name] = arr
    return out


def write_table_csv(path, columns: dict, config_hash_hex: str = "") -> Path:
    """Column-oriented CSV: one named column per 1-D array, 17 digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float).ravel() for n in names]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("all columns must have the same length")
    with open(path, "w") as f:
        if config_hash_hex:
            f.write(f"# config_hash={config_hash_hex}\n")
        f.write(",".join(names) + "\n")
        data = np.column_stack(cols)
        np.savetxt(f, data, delimiter=",", fmt="%.17g")
    return path


def write_matrix_csv(path, matrix: np.ndarray, coords: np.ndarray,
                     config_hash_hex: str = "") -> Path:
    """Square matrix with a site-coordinate header row and column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    m = np.asarray(matrix, dtype=float)
    x = np.asarray(coords, dtype=float)
    if m.shape != (len(x), len(x)):
        raise ValueError(f"matrix shape {m.shape} does not match coords ({len(x)})")
    body = np.empty((len(x) + 1, len(x) + 1))
    body[0, 0] = np.nan
    body[0, 1:] = x
    body[1:, 0] = x
    body[1:, 1:] = m
    with open(path, "w") as f:
        if config_hash_hex:
            f.write(f"# config_hash={config_hash_hex}\n")
        np.savetxt(f, body, delimiter=",", fmt="%.17g")
    return path


def read_table_csv(path) -> dict:
    path = Path(path)
    with open(path) as f:
        line = f.readline()
        if line.startswith("#"):
            line = f.readline()
        names = [s.strip() for s in line.strip().split(",")]
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}
