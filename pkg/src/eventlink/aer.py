"""Bit-exact binary serialization of event streams (EVT8 container).

Each event occupies exactly 8 bytes: a 32-bit microsecond offset from the
stream epoch, a 16-bit x coordinate, and a 16-bit word packing the polarity
into bit 15 and y into bits 0-14.  A fixed 36-byte header carries the
geometry, the time span in microseconds, and the record count.  All fields
are little-endian.
"""

from __future__ import annotations

import struct

import numpy as np

from .events import EventStream

__all__ = ["CodecError", "encode_stream", "decode_stream",
           "MAGIC", "HEADER_SIZE", "RECORD_SIZE"]

MAGIC = b"EVT8"
VERSION = 1
HEADER_SIZE = 36
RECORD_SIZE = 8

_HEADER = struct.Struct("<4sHHHHQQQ")  # magic, version, width, height, pad, t0, t1, count
_RECORD_DTYPE = np.dtype([("t_off", "<u4"), ("x", "<u2"), ("packed", "<u2")])

assert _HEADER.size == HEADER_SIZE


class CodecError(ValueError):
    """Raised for any malformed EVT8 input or unencodable stream."""


# Absorbs float roundoff when an integer-microsecond time passes through
# seconds; well below the floor quantization step.
_US_SLACK = 1e-5


def encode_stream(stream: EventStream) -> bytes:
    """Serialize a stream to the EVT8 container (36 + 8*N bytes).

    Timestamps are quantized to floor(microseconds); record order equals
    stream order.
    """
    if stream.width > 0xFFFF or stream.height > 0x7FFF:
        raise CodecError(
            f"geometry {stream.width}x{stream.height} exceeds 16-bit x / 15-bit y")
    t0_us = int(np.floor(stream.t_start * 1e6 + _US_SLACK))
    t1_us = int(np.floor(stream.t_end * 1e6 + _US_SLACK))
    span = t1_us - t0_us
    if span > 0xFFFFFFFF:
        raise CodecError(f"time span {span} us exceeds 32-bit offsets")

    n = len(stream)
    rec = np.empty(n, dtype=_RECORD_DTYPE)
    t_off = np.floor(stream.ts * 1e6 + _US_SLACK).astype(np.int64) - t0_us
    if n and (t_off.min() < 0 or t_off.max() > span):
        raise CodecError("event timestamp outside the header time span")
    rec["t_off"] = t_off
    rec["x"] = stream.xs
    rec["packed"] = stream.ys.astype(np.uint16) | (
        (stream.ps > 0).astype(np.uint16) << 15)

    header = _HEADER.pack(MAGIC, VERSION, stream.width, stream.height, 0,
                          t0_us, t1_us, n)
    return header + rec.tobytes()


def decode_stream(data: bytes) -> EventStream:
    """Parse an EVT8 container back into an EventStream.

    Inverse of :func:`encode_stream` up to microsecond quantization; exact
    when all timestamps are integer microseconds.  Every malformed input
    raises :class:`CodecError`.
    """
    if len(data) < HEADER_SIZE:
        raise CodecError(f"input shorter than the {HEADER_SIZE}-byte header")
    magic, version, width, height, pad, t0_us, t1_us, count = _HEADER.unpack(
        data[:HEADER_SIZE])
    if magic != MAGIC:
        raise CodecError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CodecError(f"unsupported version {version}")
    if t1_us < t0_us:
        raise CodecError("t_end_us precedes t_start_us")
    payload = data[HEADER_SIZE:]
    if len(payload) != count * RECORD_SIZE:
        raise CodecError(
            f"payload is {len(payload)} bytes, expected {count * RECORD_SIZE}")

    rec = np.frombuffer(payload, dtype=_RECORD_DTYPE)
    xs = rec["x"].astype(np.int32)
    ys = (rec["packed"] & 0x7FFF).astype(np.int32)
    ps = np.where(rec["packed"] >> 15 == 1, 1, -1).astype(np.int8)
    t_off = rec["t_off"].astype(np.int64)
    if count:
        if xs.max() >= width or ys.max() >= height:
            raise CodecError("record coordinate outside declared geometry")
        if np.any(np.diff(t_off) < 0):
            raise CodecError("record timestamps decrease")
        if t0_us + int(t_off.max()) > t1_us:
            raise CodecError("record timestamp beyond t_end_us")
    ts = (t0_us + t_off) / 1e6
    return EventStream(xs, ys, ts, ps, width, height, t0_us / 1e6, t1_us / 1e6)
