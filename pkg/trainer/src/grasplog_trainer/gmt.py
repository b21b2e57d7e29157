"""Reader/writer for the dataset's self-describing tensor files.

Implemented against the container layout alone (magic ``GMT1``, dtype
code, u8 ndim, little-endian u32 dims, raw row-major payload) so this
package needs no import from the generator.
"""

from __future__ import annotations

import os
import struct

import numpy as np

MAGIC = b"GMT1"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("u1")}
_CODES = {np.dtype("<f4"): 0, np.dtype("u1"): 1}


def read_tensor(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a tensor file")
    code, ndim = struct.unpack_from("<BB", data, 4)
    if code not in _DTYPES:
        raise ValueError(f"{path}: unknown dtype code {code}")
    dims = struct.unpack_from(f"<{ndim}I", data, 6)
    arr = np.frombuffer(data, dtype=_DTYPES[code], offset=6 + 4 * ndim)
    if arr.size != int(np.prod(dims, dtype=np.int64)):
        raise ValueError(f"{path}: truncated payload")
    return arr.reshape(dims).copy()


def write_tensor(path: str, array: np.ndarray) -> None:
    array = np.ascontiguousarray(array)
    if array.dtype != np.uint8:
        array = array.astype("<f4")
    header = MAGIC + struct.pack("<BB", _CODES[array.dtype], array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(array.tobytes())
    os.replace(tmp, path)
