"""Configuration objects for the learned transmission/deblurring system."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Budget:
    """Channel-symbol budget: per-stream complex symbol counts against a
    source size of ``n0`` pixels."""

    k0: int
    k1: int
    k2: int
    n0: int

    def __post_init__(self):
        for name in ("k0", "k1", "k2", "n0"):
            value = getattr(self, name)
            if not isinstance(value, int):
                raise ValueError(f"{name} must be an integer, got {value!r}")
        if self.k0 < 1 or self.k1 < 1 or self.n0 < 1:
            raise ValueError("k0, k1 and n0 must be positive")
        if self.k2 < 0:
            raise ValueError("k2 must be non-negative")

    @property
    def k(self) -> int:
        return self.k0 + self.k1 + self.k2

    @property
    def cbr(self) -> Fraction:
        """Channel uses per source pixel, as an exact rational."""
        return Fraction(self.k, self.n0)


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyper-parameters (toy scale, CPU friendly)."""

    height: int = 48
    width: int = 48
    image_channels: int = 1
    K: int = 3
    k0: int = 256
    k1: int = 256
    k2: int = 256
    base_width: int = 16
    attn_heads: int = 4
    attn_tokens: int = 12
    event_scale: float = 10.0
    use_events: bool = True

    def __post_init__(self):
        if self.height % 8 or self.width % 8:
            raise ValueError("height and width must be multiples of 8")
        if self.K < 1:
            raise ValueError("K must be positive")
        if self.attn_tokens < 1 or self.attn_heads < 1:
            raise ValueError("attention configuration must be positive")
        if self.base_width % self.attn_heads:
            raise ValueError("base_width must divide evenly into heads")
        if self.event_scale <= 0:
            raise ValueError("event_scale must be positive")

    @property
    def event_channels(self) -> int:
        return 2 * self.K

    @property
    def n0(self) -> int:
        return self.height * self.width * self.image_channels

    @property
    def budget(self) -> Budget:
        return Budget(self.k0, self.k1, self.k2, self.n0)


@dataclass(frozen=True)
class TrainConfig:
    """Three-stage training schedule."""

    lr: float = 2e-4
    batch_size: int = 8
    stage1_steps: int = 400
    stage2_steps: int = 400
    stage3_steps: int = 200
    snr_db: float | None = 10.0
    noise_seed: int = 0
    shuffle_seed: int = 0
    log_every: int = 10

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        for name in ("stage1_steps", "stage2_steps", "stage3_steps"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
