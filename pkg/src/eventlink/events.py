"""Event and frame domain types plus the threshold-crossing event simulator.

An event camera fires a signed spike whenever the log intensity at a pixel
moves by a contrast threshold ``c`` from the level at the last spike.  The
simulator below applies that rule to a sequence of intensity frames, with the
log signal linearly interpolated between frame timestamps so crossing times
are closed-form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Event",
    "EventStream",
    "FrameSequence",
    "SimulatorConfig",
    "simulate_events",
    "accumulate",
    "accumulate_maps",
]


@dataclass(frozen=True)
class Event:
    """A single polarity spike: column, row, time in seconds, polarity +/-1."""

    x: int
    y: int
    t: float
    p: int

    def __post_init__(self):
        if self.p not in (+1, -1):
            raise ValueError(f"polarity must be +1 or -1, got {self.p}")
        if self.t < 0:
            raise ValueError(f"negative timestamp {self.t}")


class EventStream:
    """A time-sorted set of events with the sensor geometry and time span.

    Events are stored as parallel numpy arrays (xs, ys, ts, ps) sorted by
    (t, y, x, p).  All coordinates lie inside (width, height) and all
    timestamps inside [t_start, t_end].
    """

    def __init__(self, xs, ys, ts, ps, width, height, t_start, t_end):
        self.xs = np.ascontiguousarray(xs, dtype=np.int32)
        self.ys = np.ascontiguousarray(ys, dtype=np.int32)
        self.ts = np.ascontiguousarray(ts, dtype=np.float64)
        self.ps = np.ascontiguousarray(ps, dtype=np.int8)
        self.width = int(width)
        self.height = int(height)
        self.t_start = float(t_start)
        self.t_end = float(t_end)
        self._validate()

    def _validate(self):
        n = len(self.ts)
        if not (len(self.xs) == len(self.ys) == len(self.ps) == n):
            raise ValueError("event field arrays have mismatched lengths")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("sensor geometry must be positive")
        if self.t_end < self.t_start:
            raise ValueError("t_end precedes t_start")
        if n == 0:
            return
        if np.any(np.diff(self.ts) < 0):
            raise ValueError("event timestamps must be non-decreasing")
        if self.ts[0] < self.t_start or self.ts[-1] > self.t_end:
            raise ValueError("event timestamps outside [t_start, t_end]")
        if np.any((self.xs < 0) | (self.xs >= self.width)):
            raise ValueError("event x coordinate out of range")
        if np.any((self.ys < 0) | (self.ys >= self.height)):
            raise ValueError("event y coordinate out of range")
        if not np.all(np.abs(self.ps) == 1):
            raise ValueError("polarities must be +1 or -1")

    @classmethod
    def from_events(cls, events, width, height, t_start, t_end):
        """Build a stream from an iterable of Event, sorting by (t, y, x, p)."""
        events = list(events)
        xs = np.array([e.x for e in events], dtype=np.int32)
        ys = np.array([e.y for e in events], dtype=np.int32)
        ts = np.array([e.t for e in events], dtype=np.float64)
        ps = np.array([e.p for e in events], dtype=np.int8)
        order = np.lexsort((ps, xs, ys, ts))
        return cls(xs[order], ys[order], ts[order], ps[order],
                   width, height, t_start, t_end)

    @classmethod
    def empty(cls, width, height, t_start, t_end):
        z = np.array([], dtype=np.float64)
        return cls(z, z, z, z, width, height, t_start, t_end)

    def __len__(self):
        return len(self.ts)

    def __iter__(self):
        for x, y, t, p in zip(self.xs, self.ys, self.ts, self.ps):
            yield Event(int(x), int(y), float(t), int(p))

    @property
    def events(self):
        return list(self)

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.t_start == other.t_start
            and self.t_end == other.t_end
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.ys, other.ys)
            and np.array_equal(self.ts, other.ts)
            and np.array_equal(self.ps, other.ps)
        )

    def __repr__(self):
        return (f"EventStream({len(self)} events, {self.width}x{self.height}, "
                f"[{self.t_start}, {self.t_end}])")


@dataclass
class FrameSequence:
    """Timestamped linear-intensity frames in [0, 1].

    ``frames`` has shape (N, H, W) for luminance or (N, H, W, C) for color;
    ``timestamps`` is strictly increasing, one entry per frame.
    """

    frames: np.ndarray
    timestamps: np.ndarray

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        if self.frames.ndim not in (3, 4):
            raise ValueError("frames must have shape (N, H, W) or (N, H, W, C)")
        if len(self.timestamps) != self.frames.shape[0]:
            raise ValueError("one timestamp per frame required")
        if len(self.timestamps) >= 2 and np.any(np.diff(self.timestamps) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("non-finite intensity values")
        if self.frames.size and (self.frames.min() < 0 or self.frames.max() > 1):
            raise ValueError("intensities must lie in [0, 1]")

    @property
    def num_frames(self):
        return self.frames.shape[0]

    @property
    def height(self):
        return self.frames.shape[1]

    @property
    def width(self):
        return self.frames.shape[2]

    def luminance(self):
        """Collapse color frames to a single luminance channel (BT.709 weights)."""
        if self.frames.ndim == 3:
            return self
        if self.frames.shape[3] == 1:
            return FrameSequence(self.frames[..., 0], self.timestamps)
        if self.frames.shape[3] != 3:
            raise ValueError("expected 1 or 3 channels")
        luma = self.frames @ np.array([0.2126, 0.7152, 0.0722])
        return FrameSequence(luma, self.timestamps)


@dataclass(frozen=True)
class SimulatorConfig:
    """Contrast threshold ``c`` and the intensity floor applied before log."""

    c: float
    eps: float = 1e-3

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("contrast threshold must be positive")
        if not 0 < self.eps < 1:
            raise ValueError("intensity floor must lie in (0, 1)")


# Relative slack when counting threshold multiples, so a log change of
# exactly k*c emits k events despite floating-point rounding.
_CROSSING_TOL = 1e-9


def simulate_events(frames: FrameSequence, cfg: SimulatorConfig) -> EventStream:
    """Run the threshold-crossing model over a frame sequence.

    Per pixel the log intensity log(max(I, eps)) is linearly interpolated
    between consecutive frames.  Each crossing of a level an integer multiple
    of ``c`` away from the level at the last emitted event produces one event
    at the interpolated crossing time, with polarity the sign of the change.
    The reference level starts at the first frame and resets to the crossed
    level at every emitted event.
    """
    if frames.frames.ndim != 3:
        raise ValueError("event simulation requires single-channel frames")
    if frames.num_frames < 2:
        raise ValueError("need at least 2 frames to simulate events")

    c = cfg.c
    h, w = frames.height, frames.width
    log_frames = np.log(np.maximum(frames.frames, cfg.eps))
    tstamps = frames.timestamps

    ref = log_frames[0].copy()
    xs_all, ys_all, ts_all, ps_all = [], [], [], []
    yy, xx = np.mgrid[0:h, 0:w]
    yy = yy.ravel()
    xx = xx.ravel()

    for k in range(frames.num_frames - 1):
        l0 = log_frames[k].ravel()
        l1 = log_frames[k + 1].ravel()
        t0, t1 = tstamps[k], tstamps[k + 1]
        d = l1 - ref.ravel()
        n = np.floor(np.abs(d) / c + _CROSSING_TOL).astype(np.int64)
        sign = np.where(d >= 0, 1, -1).astype(np.int8)
        active = n > 0
        if not np.any(active):
            continue

        idx = np.flatnonzero(active)
        counts = n[idx]
        flat = np.repeat(idx, counts)
        # multiple index 1..n per pixel
        m = np.arange(counts.sum()) - np.repeat(
            np.concatenate(([0], np.cumsum(counts)[:-1])), counts) + 1
        s = sign[flat]
        levels = ref.ravel()[flat] + s * m * c
        # within an interval the interpolant is monotone between l0 and l1,
        # and |l0 - ref| < c guarantees a nonzero slope wherever n >= 1
        t_cross = t0 + (levels - l0[flat]) / (l1[flat] - l0[flat]) * (t1 - t0)
        t_cross = np.clip(t_cross, t0, t1)

        xs_all.append(xx[flat])
        ys_all.append(yy[flat])
        ts_all.append(t_cross)
        ps_all.append(s)
        np.add.at(ref, (yy[idx], xx[idx]), sign[idx] * counts * c)

    t_start, t_end = tstamps[0], tstamps[-1]
    if not xs_all:
        return EventStream.empty(w, h, t_start, t_end)

    xs = np.concatenate(xs_all)
    ys = np.concatenate(ys_all)
    ts = np.concatenate(ts_all)
    ps = np.concatenate(ps_all)
    order = np.lexsort((ps, xs, ys, ts))
    return EventStream(xs[order], ys[order], ts[order], ps[order],
                       w, h, t_start, t_end)


def accumulate(stream: EventStream, x: int, y: int, t_a: float, t_b: float) -> int:
    """Signed event count at pixel (x, y) over the oriented interval (t_a, t_b].

    Events exactly at the lower bound are excluded, at the upper bound
    included; swapping the bounds negates the result.
    """
    if not (0 <= x < stream.width and 0 <= y < stream.height):
        raise ValueError(f"pixel ({x}, {y}) outside {stream.width}x{stream.height}")
    sign = 1
    if t_a > t_b:
        t_a, t_b = t_b, t_a
        sign = -1
    sel = (stream.xs == x) & (stream.ys == y)
    ts = stream.ts[sel]
    ps = stream.ps[sel]
    inside = (ts > t_a) & (ts <= t_b)
    return sign * int(ps[inside].sum())


def accumulate_maps(stream: EventStream, t_ref: float, times) -> np.ndarray:
    """Signed count maps accumulate(stream, x, y, t_ref, t) for each t in times.

    Returns an int64 array of shape (len(times), H, W); orientation follows
    the sign of t - t_ref as in :func:`accumulate`.
    """
    times = np.asarray(times, dtype=np.float64)
    bounds = np.concatenate(([t_ref], times))
    # cumulative signed counts C(t) = sum of polarities with timestamp <= t
    order = np.argsort(bounds, kind="stable")
    cum = np.zeros((len(bounds), stream.height, stream.width), dtype=np.int64)
    running = np.zeros((stream.height, stream.width), dtype=np.int64)
    prev_idx = 0
    for b in order:
        stop = np.searchsorted(stream.ts, bounds[b], side="right")
        if stop > prev_idx:
            sl = slice(prev_idx, stop)
            np.add.at(running, (stream.ys[sl], stream.xs[sl]),
                      stream.ps[sl].astype(np.int64))
            prev_idx = stop
        cum[b] = running
    return cum[1:] - cum[0]
