"""Motion-blur synthesis: the blurry observation is the temporal average of
the latent sharp frames over the exposure window."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import FrameSequence

__all__ = ["BlurryImage", "synthesize_blur"]


@dataclass
class BlurryImage:
    """A blurred observation with its exposure midpoint t_f and duration T."""

    pixels: np.ndarray
    t_f: float
    T: float

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim not in (2, 3):
            raise ValueError("pixels must be (H, W) or (H, W, C)")
        if not self.T > 0:
            raise ValueError("exposure duration must be positive")
        if not np.all(np.isfinite(self.pixels)):
            raise ValueError("non-finite pixel values")
        if self.pixels.size and (self.pixels.min() < 0 or self.pixels.max() > 1):
            raise ValueError("pixel values must lie in [0, 1]")

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def exposure(self):
        """(start, end) of the exposure window."""
        return self.t_f - self.T / 2, self.t_f + self.T / 2


def synthesize_blur(frames: FrameSequence) -> BlurryImage:
    """Average the frame stack into a blurry image.

    The exposure midpoint is the middle of the timestamp span and the
    duration is the span length; a single frame gets a nominal unit exposure.
    Color stacks are averaged per channel.
    """
    if frames.num_frames < 1:
        raise ValueError("cannot blur an empty frame sequence")
    pixels = frames.frames.mean(axis=0)
    t = frames.timestamps
    if frames.num_frames == 1:
        return BlurryImage(pixels, float(t[0]), 1.0)
    return BlurryImage(pixels, float((t[0] + t[-1]) / 2), float(t[-1] - t[0]))
