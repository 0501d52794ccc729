"""Dataset loading (exported manifests) and a synthetic toy set.

A dataset is a dict of float32 torch tensors:
    x0: (N, C, H, W)   blurry images in [0, 1]
    x1: (N, 2K, H, W)  signed event-count tensors
    gt: (N, C, H, W)   sharp ground truth at the exposure midpoint
"""

from __future__ import annotations

import os

import numpy as np
import torch

from .config import ModelConfig
from .formats import read_etns, read_image_gray, read_manifest


def _center_crop(arr: np.ndarray, height: int, width: int) -> np.ndarray:
    h, w = arr.shape[-2], arr.shape[-1]
    if h < height or w < width:
        raise ValueError(f"sample of size {h}x{w} smaller than crop "
                         f"{height}x{width}")
    top = (h - height) // 2
    left = (w - width) // 2
    return arr[..., top:top + height, left:left + width]


def load_manifest_dataset(manifest_path: str | os.PathLike,
                          cfg: ModelConfig) -> dict[str, torch.Tensor]:
    """Load all usable samples listed in a manifest, center-cropped to the
    configured size."""
    entries = read_manifest(manifest_path)
    x0s, x1s, gts = [], [], []
    for entry in entries:
        blur = _center_crop(read_image_gray(entry.blur_path),
                            cfg.height, cfg.width)
        gt = _center_crop(read_image_gray(entry.gt_path),
                          cfg.height, cfg.width)
        tensor = read_etns(entry.tensor_path)
        if tensor.ndim != 3 or tensor.shape[0] != cfg.event_channels:
            raise ValueError(f"{entry.tensor_path}: expected "
                             f"{cfg.event_channels}xHxW event tensor, got "
                             f"shape {tensor.shape}")
        tensor = _center_crop(tensor.real.astype(np.float64),
                              cfg.height, cfg.width)
        x0s.append(blur[None])
        x1s.append(tensor)
        gts.append(gt[None])
    if not x0s:
        return {"x0": torch.empty(0, cfg.image_channels, cfg.height,
                                  cfg.width),
                "x1": torch.empty(0, cfg.event_channels, cfg.height,
                                  cfg.width),
                "gt": torch.empty(0, cfg.image_channels, cfg.height,
                                  cfg.width)}
    return {"x0": torch.tensor(np.stack(x0s), dtype=torch.float32),
            "x1": torch.tensor(np.stack(x1s), dtype=torch.float32),
            "gt": torch.tensor(np.stack(gts), dtype=torch.float32)}


def make_jump_dataset(n: int, cfg: ModelConfig, seed: int = 0,
                      threshold: float = 0.1) -> dict[str, torch.Tensor]:
    """Synthetic scenes with a single intensity jump inside the exposure.

    Each scene shows a blocky image L1 until a jump time t_j, then a second
    blocky image L2, over a unit exposure centred at t_f = 0.5.  The blurry
    observation is the time average t_j*L1 + (1-t_j)*L2; the sharp ground
    truth at t_f is L1 when the jump happens after the midpoint and L2
    otherwise.  All events fire at t_j, so the event tensor localizes the
    jump relative to the interval boundaries and disambiguates which image
    the midpoint shows — information the blurry image alone cannot carry.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if cfg.height % 6 or cfg.width % 6:
        raise ValueError("height and width must be multiples of 6")
    rng = np.random.default_rng(seed)
    eps = 1e-3
    boundaries = [j / (2 * cfg.K) for j in range(2 * cfg.K + 1)
                  if j != cfg.K]
    lo, hi = boundaries[cfg.K - 1], boundaries[cfg.K]

    x0 = np.empty((n, 1, cfg.height, cfg.width))
    x1 = np.zeros((n, cfg.event_channels, cfg.height, cfg.width))
    gt = np.empty((n, 1, cfg.height, cfg.width))
    for i in range(n):
        block = (cfg.height // 6, cfg.width // 6)
        l1 = np.kron(rng.uniform(0.1, 0.9, (6, 6)), np.ones(block))
        l2 = np.kron(rng.uniform(0.1, 0.9, (6, 6)), np.ones(block))
        # keep the jump strictly inside the innermost boundary pair and
        # away from the midpoint so the ground truth is unambiguous
        side = 1 if rng.random() < 0.5 else -1
        t_j = 0.5 + side * rng.uniform(0.02, 0.5 - lo - 0.01)
        assert lo < t_j <= hi

        d = np.log((l2 + eps) / (l1 + eps))
        count = np.sign(d) * np.floor(np.abs(d) / threshold)
        for ch, b in enumerate(boundaries):
            if b < 0.5 and b < t_j <= 0.5:
                x1[i, ch] = -count
            elif b > 0.5 and 0.5 < t_j <= b:
                x1[i, ch] = count

        x0[i, 0] = t_j * l1 + (1.0 - t_j) * l2
        gt[i, 0] = l1 if t_j > 0.5 else l2
    return {"x0": torch.tensor(x0, dtype=torch.float32),
            "x1": torch.tensor(x1, dtype=torch.float32),
            "gt": torch.tensor(gt, dtype=torch.float32)}


def dataset_size(dataset: dict[str, torch.Tensor]) -> int:
    sizes = {tensor.shape[0] for tensor in dataset.values()}
    if len(sizes) != 1:
        raise ValueError("inconsistent dataset tensor lengths")
    return sizes.pop()
