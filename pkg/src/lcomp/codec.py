"""Encode sorted keys as (segments, residuals) and decode them back."""
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SEGMENT_BITS,
    CompressedList,
    ResidualArray,
    SortedKeyList,
    residual_bit_width,
)
from .errors import CorruptPayload, EmptyInput, IndexOutOfRange
from .fileformat import HEADER_BITS, residual_section_bytes
from .pla import fit

# positions decoded per vectorised block (a multiple of 8 lanes)
BLOCK = 8 * 8192


@dataclass(frozen=True)
class SpaceReport:
    n: int
    segment_bits: int
    residual_bits: int
    header_bits: int
    padding_bits: int
    total_bits: int
    bits_per_int: float
    ratio: float

    @property
    def serialized_bits(self):
        return self.total_bits + self.padding_bits

    @property
    def serialized_bytes(self):
        return self.serialized_bits // 8


def compress(keys, epsilon):
    """Fit an epsilon-PLA to ``keys`` and pack the biased residuals."""
    keys = SortedKeyList.of(keys)
    if len(keys) == 0:
        raise EmptyInput("cannot compress an empty key list")
    if not 0 <= epsilon < 1 << 32:
        raise ValueError("epsilon must lie in [0, 2**32)")
    result = fit(keys, epsilon)
    stored = (result.residuals + epsilon).astype(np.uint64)
    residuals = ResidualArray.pack(stored, residual_bit_width(epsilon))
    return CompressedList(epsilon, len(keys), keys.width, int(keys.keys[0]), result.segments, residuals)


def _check_layout(c):
    starts = c.starts
    if starts[0] != 0 or (len(starts) > 1 and not (np.diff(starts) > 0).all()) or starts[-1] >= c.n:
        raise CorruptPayload("segment starts are not strictly increasing from 0")
    res = c.require_residuals()
    if res.count != c.n:
        raise CorruptPayload(f"residual count {res.count} != n {c.n}")


def decompress_range(c, lo, hi, out=None):
    """Decode keys ``lo..hi-1`` block by block; returns a uint64 array."""
    if out is None:
        out = np.empty(hi - lo, dtype=np.uint64)
    if hi <= lo:
        return out
    res = c.require_residuals()
    starts, slopes, icepts, anchors = c.starts, c.slopes, c.intercepts, c.anchors
    eps = np.int64(c.epsilon)
    base = np.uint64(c.base)
    stored = np.empty(min(BLOCK, hi - lo), dtype=np.uint64)
    for b_lo in range(lo, hi, BLOCK):
        b_hi = min(b_lo + BLOCK, hi)
        m = b_hi - b_lo
        pos = np.arange(b_lo, b_hi, dtype=np.int64)
        seg = np.searchsorted(starts, pos, side="right") - 1
        x = (pos - starts[seg]).astype(np.float64)
        pred = np.floor(slopes[seg] * x + icepts[seg]).astype(np.int64)
        pred += anchors[seg]
        res.range(b_lo, b_hi, out=stored[:m])
        pred += stored[:m].view(np.int64)
        pred -= eps
        np.add(pred.view(np.uint64), base, out=out[b_lo - lo:b_hi - lo])
    return out


def decompress(c, out=None):
    """Vectorised full decode into a SortedKeyList (or into ``out`` when given)."""
    _check_layout(c)
    keys = decompress_range(c, 0, c.n, out=out)
    if out is not None:
        return out
    if c.n > 1 and not (keys[1:] > keys[:-1]).all():
        raise CorruptPayload("decoded keys are not strictly increasing")
    return SortedKeyList(keys, c.key_width)


def decompress_scalar(c, out=None):
    """Reference decoder: one position at a time, straight from the packed bytes."""
    _check_layout(c)
    res = c.require_residuals()
    payload, width = res.payload, res.bit_width
    mask = (1 << width) - 1
    eps = c.epsilon
    if out is None:
        out = np.empty(c.n, dtype=np.uint64)
    floor = math.floor
    anchors = c.anchors.tolist()
    ends = c.ends.tolist()
    for j, seg in enumerate(c.segments):
        a, b, s = seg.slope, seg.intercept, seg.start
        base = c.base + anchors[j] - eps
        for i in range(s, ends[j]):
            bitpos = i * width
            o = bitpos >> 3
            v = (int.from_bytes(payload[o:o + 9], "little") >> (bitpos & 7)) & mask
            out[i] = base + floor(a * (i - s) + b) + v
    return out


def access(c, i):
    """Key at position ``i``, decoding only that position."""
    if not 0 <= i < c.n:
        raise IndexOutOfRange(f"position {i} outside [0, {c.n})")
    res = c.require_residuals()
    return c.predict_at(i) + res.get(i) - c.epsilon


def space_report(c):
    n = c.n
    b = residual_bit_width(c.epsilon)
    segment_bits = SEGMENT_BITS * len(c.segments)
    if c.has_residuals:
        residual_bits = n * b
        raw, pad = residual_section_bytes(n, c.epsilon)
        padding_bits = 8 * raw - residual_bits + 8 * pad
    else:
        residual_bits = padding_bits = 0
    total = segment_bits + residual_bits + HEADER_BITS
    return SpaceReport(
        n=n,
        segment_bits=segment_bits,
        residual_bits=residual_bits,
        header_bits=HEADER_BITS,
        padding_bits=padding_bits,
        total_bits=total,
        bits_per_int=total / n,
        ratio=total / (n * int(c.key_width)),
    )
