"""Helpers to fabricate dataset files in the documented on-disk formats.

Written from the format specification alone so these tests stay decoupled
from the simulator package.
"""

import struct

import numpy as np
import pytest

_CODES = {np.dtype("float64"): 0, np.dtype("complex128"): 1, np.dtype("int64"): 2}


def _pack_array(arr, units=b"xi,c0,mu0", sha=b"\0" * 32):
    arr = np.ascontiguousarray(arr)
    code = _CODES[arr.dtype]
    head = b"DBEC" + struct.pack("<IHH", 1, code, arr.ndim)
    head += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    head += units.ljust(16, b"\0")[:16] + sha[:32].ljust(32, b"\0")
    return head + arr.astype(arr.dtype.newbyteorder("<")).tobytes()


def write_dataset_file(path, arrays):
    blob = b"DBED" + struct.pack("<II", 1, len(arrays))
    for name, arr in arrays.items():
        nb = name.encode()
        blob += struct.pack("<H", len(nb)) + nb
        blob += _pack_array(np.asarray(arr, dtype=float)
                            if np.asarray(arr).dtype.kind == "f"
                            else np.asarray(arr))
    path.write_bytes(blob)
    return path


def write_table_file(path, columns):
    names = list(columns)
    rows = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    with open(path, "w") as f:
        f.write("# config_hash=test\n")
        f.write(",".join(names) + "\n")
        np.savetxt(f, rows, delimiter=",", fmt="%.17g")
    return path


def write_matrix_file(path, matrix, coords):
    n = len(coords)
    body = np.empty((n + 1, n + 1))
    body[0, 0] = np.nan
    body[0, 1:] = coords
    body[1:, 0] = coords
    body[1:, 1:] = matrix
    np.savetxt(path, body, delimiter=",", fmt="%.17g")
    return path


@pytest.fixture
def fabricate(tmp_path):
    class F:
        base = tmp_path

        dataset = staticmethod(lambda name, arrays: write_dataset_file(tmp_path / name, arrays))
        table = staticmethod(lambda name, cols: write_table_file(tmp_path / name, cols))
        matrix = staticmethod(lambda name, m, x: write_matrix_file(tmp_path / name, m, x))

    return F
