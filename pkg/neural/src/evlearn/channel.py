"""AWGN channel for batched real-valued symbol vectors.

A vector of 2k reals is interpreted as k complex symbols (interleaved
real/imaginary parts).  Power is normalized per sample so that the mean
complex-symbol power is exactly 1, and noise of per-symbol variance
10^(-SNR/10) is split evenly between the two real components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch


@dataclass
class Channel:
    """AWGN channel with a persistent seeded noise stream.

    ``snr_db=None`` means noiseless (identity).  Noise is drawn fresh on
    every call, so repeated transmissions during training see independent
    realizations while the overall run stays reproducible.
    """

    snr_db: float | None
    seed: int = 0
    _generator: torch.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self._generator = torch.Generator()
        self._generator.manual_seed(self.seed)

    @property
    def noise_variance(self) -> float:
        if self.snr_db is None:
            return 0.0
        return 10.0 ** (-self.snr_db / 10.0)

    def __call__(self, z: torch.Tensor) -> torch.Tensor:
        if z.ndim != 2 or z.shape[1] % 2:
            raise ValueError("expected a (batch, 2k) real symbol tensor")
        if self.snr_db is None:
            return z
        sigma = (self.noise_variance / 2.0) ** 0.5
        noise = torch.randn(z.shape, generator=self._generator,
                            dtype=z.dtype, device=z.device)
        return z + sigma * noise


def power_normalize(z: torch.Tensor) -> torch.Tensor:
    """Scale each row so its mean complex-symbol power is exactly 1."""
    if z.ndim != 2 or z.shape[1] % 2:
        raise ValueError("expected a (batch, 2k) real symbol tensor")
    if not torch.isfinite(z).all():
        raise ValueError("symbols must be finite")
    k = z.shape[1] // 2
    total = (z * z).sum(dim=1, keepdim=True)
    if (total == 0).any():
        raise ValueError("cannot normalize an all-zero symbol vector")
    return z * torch.sqrt(k / total)


def mean_symbol_power(z: torch.Tensor) -> torch.Tensor:
    """Per-sample mean complex-symbol power of a (batch, 2k) real tensor."""
    k = z.shape[1] // 2
    return (z * z).sum(dim=1) / k
