"""Lossless raster I/O for 8-bit and 16-bit grayscale/RGB images.

Linearization is a plain scale by the bit-depth maximum (255 or 65535);
no gamma handling.  Files are written as PNG.
"""

from __future__ import annotations

import os

import cv2
import numpy as np

__all__ = ["read_image", "write_image"]


def read_image(path) -> np.ndarray:
    """Load an image as float64 in [0, 1]; (H, W) for gray, (H, W, 3) RGB."""
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ValueError(f"cannot read image {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise ValueError(f"unsupported image dtype {raw.dtype} in {path}")
    img = raw.astype(np.float64) / scale
    if img.ndim == 3:
        if img.shape[2] == 4:
            img = img[:, :, :3]
        img = img[:, :, ::-1]  # BGR -> RGB
    return np.ascontiguousarray(img)


def write_image(path, img, depth: int = 16):
    """Write a [0, 1] float image as 8- or 16-bit PNG."""
    img = np.asarray(img, dtype=np.float64)
    if depth == 8:
        scale, dtype = 255.0, np.uint8
    elif depth == 16:
        scale, dtype = 65535.0, np.uint16
    else:
        raise ValueError("depth must be 8 or 16")
    quant = np.round(np.clip(img, 0.0, 1.0) * scale).astype(dtype)
    if quant.ndim == 3:
        quant = quant[:, :, ::-1]  # RGB -> BGR
    os.makedirs(os.path.dirname(os.path.abspath(str(path))), exist_ok=True)
    if not cv2.imwrite(str(path), quant):
        raise ValueError(f"cannot write image {path}")
