"""ETNS tensor container: the file boundary for event tensors and complex
symbol vectors.

Layout (all little-endian): magic "ETNS", version u16 = 1, dtype u8
(0 = float32, 1 = complex64 as interleaved float32 pairs), rank u8, then
rank u32 dimensions, then the payload in row-major order.
"""

from __future__ import annotations

import struct

import numpy as np

__all__ = ["TensorFormatError", "write_tensor", "read_tensor",
           "save_tensor", "load_tensor"]

MAGIC = b"ETNS"
VERSION = 1

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<c8")}
_CODES = {np.dtype("<f4"): 0, np.dtype("<c8"): 1}
_PREFIX = struct.Struct("<4sHBB")


class TensorFormatError(ValueError):
    """Raised for malformed ETNS input or unsupported tensors."""


def write_tensor(array: np.ndarray) -> bytes:
    """Serialize a float32 or complex64 array to ETNS bytes."""
    array = np.asarray(array)
    if array.dtype.kind == "c":
        array = np.ascontiguousarray(array, dtype="<c8")
    else:
        array = np.ascontiguousarray(array, dtype="<f4")
    code = _CODES[array.dtype]
    if array.ndim > 255:
        raise TensorFormatError("rank exceeds 255")
    dims = struct.pack(f"<{array.ndim}I", *array.shape)
    return _PREFIX.pack(MAGIC, VERSION, code, array.ndim) + dims + array.tobytes()


def read_tensor(data: bytes) -> np.ndarray:
    """Parse ETNS bytes back into a numpy array."""
    if len(data) < _PREFIX.size:
        raise TensorFormatError("input shorter than the ETNS prefix")
    magic, version, code, rank = _PREFIX.unpack(data[:_PREFIX.size])
    if magic != MAGIC:
        raise TensorFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}")
    if code not in _DTYPES:
        raise TensorFormatError(f"unknown dtype code {code}")
    off = _PREFIX.size
    if len(data) < off + 4 * rank:
        raise TensorFormatError("truncated dimension list")
    shape = struct.unpack(f"<{rank}I", data[off:off + 4 * rank])
    off += 4 * rank
    dtype = _DTYPES[code]
    expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
    if len(data) - off != expected:
        raise TensorFormatError(
            f"payload is {len(data) - off} bytes, expected {expected}")
    return np.frombuffer(data[off:], dtype=dtype).reshape(shape).copy()


def save_tensor(path, array):
    with open(path, "wb") as f:
        f.write(write_tensor(array))


def load_tensor(path):
    with open(path, "rb") as f:
        return read_tensor(f.read())
