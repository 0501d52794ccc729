"""Fixed-size event tensor: signed event counts integrated from the exposure
midpoint out to each of 2K interval boundaries.

The exposure is divided into 2K intervals, giving 2K+1 boundaries
b_j = t_f + (j - K) * T / (2K).  Channel j holds the oriented count from t_f
to b_j; the identically-zero j = K boundary is dropped, so the tensor has
exactly 2K channels ordered by ascending j.  Channels left of the midpoint
are negative-oriented (count backward from t_f).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import EventStream, accumulate_maps

__all__ = ["EventTensor", "voxelize", "boundary_times"]

_COVER_TOL = 1e-9


@dataclass
class EventTensor:
    """2K x H x W signed count tensor with its exposure window."""

    data: np.ndarray
    K: int
    t_f: float
    T: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.data.ndim != 3 or self.data.shape[0] != 2 * self.K:
            raise ValueError(
                f"expected {2 * self.K} channels, got shape {self.data.shape}")
        if not np.array_equal(self.data, np.round(self.data)):
            raise ValueError("event tensor entries must be integral counts")

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]


def boundary_times(t_f: float, T: float, K: int) -> np.ndarray:
    """All 2K+1 interval boundaries b_j = t_f + (j - K) * T / (2K)."""
    j = np.arange(2 * K + 1, dtype=np.float64)
    return t_f + (j - K) * T / (2 * K)


def voxelize(events: EventStream, t_f: float, T: float, K: int) -> EventTensor:
    """Integrate events from the midpoint to every non-trivial boundary.

    Returns the 2K x H x W tensor of oriented counts; channel order is
    ascending boundary index with the midpoint boundary omitted.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if (events.t_start > t_f - T / 2 + _COVER_TOL
            or events.t_end < t_f + T / 2 - _COVER_TOL):
        raise ValueError("exposure window outside the event stream span")
    bounds = boundary_times(t_f, T, K)
    keep = np.concatenate([bounds[:K], bounds[K + 1:]])
    counts = accumulate_maps(events, t_f, keep)
    return EventTensor(counts.astype(np.float32), K, t_f, T)
