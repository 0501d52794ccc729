"""Readers for the dataset interchange files produced by the `eventlink`
CLI: ETNS tensor files, PNG images, and tab-separated manifests."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import cv2
import numpy as np

_ETNS_PREFIX = struct.Struct("<4sHBB")
_ETNS_MAGIC = b"ETNS"
_ETNS_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<c8")}

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


def read_etns(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _ETNS_PREFIX.size:
        raise ValueError(f"{path}: truncated tensor file")
    magic, version, dtype_code, rank = _ETNS_PREFIX.unpack_from(raw)
    if magic != _ETNS_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != 1:
        raise ValueError(f"{path}: unsupported version {version}")
    if dtype_code not in _ETNS_DTYPES:
        raise ValueError(f"{path}: unknown dtype code {dtype_code}")
    offset = _ETNS_PREFIX.size
    dims = struct.unpack_from(f"<{rank}I", raw, offset)
    offset += 4 * rank
    dtype = _ETNS_DTYPES[dtype_code]
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    if len(raw) - offset != count * dtype.itemsize:
        raise ValueError(f"{path}: payload size mismatch")
    return np.frombuffer(raw, dtype=dtype, count=count,
                         offset=offset).reshape(dims).copy()


def read_image_gray(path: str | os.PathLike) -> np.ndarray:
    """Load a PNG as a float64 grayscale array in [0, 1] (BT.709 luma for
    color inputs)."""
    img = cv2.imread(os.fspath(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise ValueError(f"cannot read image {path}")
    if img.dtype == np.uint8:
        out = img.astype(np.float64) / 255.0
    elif img.dtype == np.uint16:
        out = img.astype(np.float64) / 65535.0
    else:
        raise ValueError(f"{path}: unsupported image dtype {img.dtype}")
    if out.ndim == 3:
        out = out[..., :3][..., ::-1] @ LUMA_WEIGHTS
    return out


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    blur_path: str
    gt_path: str
    events_path: str
    tensor_path: str


def read_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    """Parse a tab-separated dataset manifest, ignoring comment lines."""
    root = os.path.dirname(os.fspath(path))
    entries = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise ValueError(
                    f"{path}:{lineno}: expected 5 tab-separated fields")
            name, blur_p, gt_p, ev_p, tz_p = fields
            entries.append(ManifestEntry(
                name,
                os.path.join(root, blur_p),
                os.path.join(root, gt_p),
                os.path.join(root, ev_p),
                os.path.join(root, tz_p),
            ))
    return entries
