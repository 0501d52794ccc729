"""Transmission layer: average-power normalization, complex AWGN at a
configured SNR, bandwidth-ratio bookkeeping, and shared/specific stream
splitting.

Symbol vectors are plain 1-D complex numpy arrays.  Noise uses the Philox
counter-based generator (numpy), with circularly-symmetric complex Gaussian
samples of per-symbol variance 10^(-SNR/10) under the unit-signal-power
convention; real and imaginary parts carry half the variance each.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "TransmissionBudget",
    "ChannelConfig",
    "noise_variance",
    "power_normalize",
    "awgn",
    "cbr",
    "split_and_merge",
]


@dataclass(frozen=True)
class TransmissionBudget:
    """Symbol counts for the image, event, and shared streams, plus the
    source image dimension n0 = H * W * channels."""

    k0: int
    k1: int
    k2: int
    n0: int

    def __post_init__(self):
        # k2 = 0 is allowed: no shared stream, the split is disjoint
        for name, lo in (("k0", 1), ("k1", 1), ("k2", 0), ("n0", 1)):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v >= lo):
                raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")

    @property
    def k(self):
        return self.k0 + self.k1 + self.k2


@dataclass(frozen=True)
class ChannelConfig:
    """snr_db = None selects the noiseless channel; seed drives the noise
    generator."""

    snr_db: float | None
    seed: int = 0

    def __post_init__(self):
        if self.snr_db is not None and not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite (or None for noiseless)")

    @property
    def noiseless(self):
        return self.snr_db is None


def noise_variance(snr_db: float) -> float:
    """Per-symbol complex noise variance for unit signal power."""
    return 10.0 ** (-snr_db / 10.0)


def power_normalize(z: np.ndarray) -> np.ndarray:
    """Scale z so its average symbol power (1/k) sum |z_i|^2 equals 1."""
    z = np.asarray(z, dtype=np.complex128)
    if z.size == 0:
        raise ValueError("cannot normalize an empty symbol vector")
    power = np.mean(np.abs(z) ** 2)
    if power == 0:
        raise ValueError("cannot normalize an all-zero symbol vector")
    return z / np.sqrt(power)


def awgn(z: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """Corrupt a power-normalized symbol vector with complex AWGN.

    Deterministic given (z, cfg.seed); the noiseless config returns the
    input unchanged.
    """
    z = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite channel input")
    if cfg.noiseless:
        return z.copy()
    power = np.mean(np.abs(z) ** 2)
    if abs(power - 1.0) > 0.01:
        raise ValueError(
            f"channel input violates the power constraint (mean power {power:.4f})")
    sigma2 = noise_variance(cfg.snr_db)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    parts = rng.standard_normal((2, z.size)) * np.sqrt(sigma2 / 2)
    return z + parts[0] + 1j * parts[1]


def cbr(budget: TransmissionBudget) -> Fraction:
    """Channel uses per source pixel, (k0 + k1 + k2) / n0, as an exact
    rational."""
    return Fraction(budget.k, budget.n0)


def split_and_merge(z_hat: np.ndarray, budget: TransmissionBudget):
    """Separate the received stream and re-attach the shared symbols.

    Returns (z0, z1) where z0 = [s0_hat, y_hat] and z1 = [s1_hat, y_hat];
    the shared block y_hat appears in both outputs.
    """
    z_hat = np.asarray(z_hat)
    if z_hat.size != budget.k:
        raise ValueError(
            f"received {z_hat.size} symbols, budget declares {budget.k}")
    s0 = z_hat[:budget.k0]
    s1 = z_hat[budget.k0:budget.k0 + budget.k1]
    y = z_hat[budget.k0 + budget.k1:]
    return np.concatenate([s0, y]), np.concatenate([s1, y])
