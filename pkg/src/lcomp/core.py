"""Domain types shared by every module.

Conventions:

* positions are 0-based;
* a segment predicts ``floor(slope * (i - start) + intercept)`` with slope and
  intercept stored as float32 and evaluated in float64, floored toward -inf;
* predictions are relative to the list's ``base`` key (its first key), which
  keeps the float32 intercepts small;
* residuals are stored biased, ``delta + epsilon``, at fixed width
  ``ceil(log2(2*epsilon + 1))``.
"""
import bisect
import enum
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import bitpack
from .errors import DuplicateKey, EmptyInput, IndexOutOfRange, MissingResiduals, UnsortedInput

_F32 = struct.Struct("<f")

SEGMENT_BYTES = 12
SEGMENT_BITS = 8 * SEGMENT_BYTES
# float64 represents every integer below this exactly; relative keys must stay under it
MAX_RELATIVE_SPAN = 1 << 53


def f32(x):
    """Round a Python float to the nearest float32 value."""
    return _F32.unpack(_F32.pack(x))[0]


class KeyWidth(enum.IntEnum):
    W32 = 32
    W64 = 64

    @classmethod
    def for_max(cls, max_key):
        return cls.W32 if max_key < (1 << 32) else cls.W64


@dataclass(frozen=True)
class SortedKeyList:
    """Strictly increasing unsigned keys held in a read-only uint64 array."""

    keys: np.ndarray
    width: KeyWidth = KeyWidth.W32

    def __post_init__(self):
        keys = _to_u64(self.keys)
        if keys.flags.writeable:
            keys = keys.copy()
            keys.flags.writeable = False
        if keys.size > 1:
            step_ok = keys[1:] > keys[:-1]
            if not step_ok.all():
                bad = int(np.argmin(step_ok))
                if keys[bad] == keys[bad + 1]:
                    raise DuplicateKey(f"duplicate key {int(keys[bad])} at position {bad + 1}")
                raise UnsortedInput(f"keys decrease at position {bad + 1}")
        width = KeyWidth(self.width)
        if width is KeyWidth.W32 and keys.size and int(keys[-1]) >= (1 << 32):
            raise ValueError("key exceeds the 32-bit universe; use KeyWidth.W64")
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "width", width)

    @classmethod
    def of(cls, values, width=None):
        """Build from any integer sequence; width inferred from the largest key unless given."""
        if isinstance(values, SortedKeyList):
            return values
        arr = _to_u64(values)
        if width is None:
            width = KeyWidth.for_max(int(arr[-1])) if arr.size else KeyWidth.W32
        return cls(arr, KeyWidth(width))

    def __len__(self):
        return int(self.keys.size)

    def __getitem__(self, i):
        return int(self.keys[i])

    def tolist(self):
        return [int(k) for k in self.keys]

    def __eq__(self, other):
        if not isinstance(other, SortedKeyList):
            return NotImplemented
        return np.array_equal(self.keys, other.keys)

    __hash__ = None


def _to_u64(values):
    arr = np.asarray(values)
    if arr.dtype == np.uint64:
        return arr
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint64)
    if arr.dtype.kind == "u":
        return arr.astype(np.uint64)
    if arr.dtype.kind == "i":
        if arr.min() < 0:
            raise UnsortedInput("keys must be unsigned")
        return arr.astype(np.uint64)
    if arr.dtype == object:
        ints = [int(v) for v in arr.ravel()]
        if min(ints) < 0 or max(ints) >= (1 << 64):
            raise ValueError("keys must lie in [0, 2**64)")
        return np.array(ints, dtype=np.uint64)
    raise TypeError(f"integer keys required, got dtype {arr.dtype}")


def as_keys(values):
    return SortedKeyList.of(values)


@dataclass(frozen=True)
class Segment:
    start: int
    slope: float
    intercept: float

    def predict(self, i):
        return predict(self, i)


def predict(seg, i):
    """Floored model value at position ``i`` (may be negative; callers clamp)."""
    return math.floor(seg.slope * float(i - seg.start) + seg.intercept)


def segment_anchors(starts, slopes, intercepts, n):
    """Integer offset each segment's intercept is relative to.

    Segment 0 is anchored at 0 (the base key); segment j at the floored value of
    segment j-1 extrapolated to ``starts[j]``. Anchors keep float32 intercepts
    small no matter how large the keys grow.
    """
    anchors = np.zeros(len(starts), dtype=np.int64)
    if len(starts) > 1:
        lengths = np.diff(starts).astype(np.float64)
        jumps = np.floor(slopes[:-1] * lengths + intercepts[:-1]).astype(np.int64)
        np.cumsum(jumps, out=anchors[1:])
    return anchors


def model_values(starts, slopes, intercepts, n):
    """Floored model prediction (relative to the base key) at every position."""
    lengths = np.diff(np.append(starts, n))
    anchors = segment_anchors(starts, slopes, intercepts, n)
    x = (np.arange(n, dtype=np.int64) - np.repeat(starts, lengths)).astype(np.float64)
    pred = np.floor(np.repeat(slopes, lengths) * x + np.repeat(intercepts, lengths)).astype(np.int64)
    return pred + np.repeat(anchors, lengths)


def residual_bit_width(epsilon):
    """Bits for one biased residual in ``[0, 2*epsilon]``: ``ceil(log2(2*epsilon + 1))``."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return (2 * epsilon).bit_length()


def encode_bias(delta, epsilon):
    return delta + epsilon


def decode_bias(value, epsilon):
    return value - epsilon


@dataclass(frozen=True, eq=False)
class ResidualArray:
    bit_width: int
    payload: bytes
    count: int

    def __post_init__(self):
        if len(self.payload) != bitpack.packed_nbytes(self.count, self.bit_width):
            raise ValueError("payload length does not match count * bit_width")

    @classmethod
    def pack(cls, stored, bit_width):
        stored = np.asarray(stored, dtype=np.uint64)
        return cls(bit_width, bitpack.pack(stored, bit_width), int(stored.size))

    @cached_property
    def _windows(self):
        return bitpack.window_view(bitpack.padded(self.payload))

    def get(self, i):
        return bitpack.unpack_one(self.payload, self.bit_width, i)

    def range(self, lo, hi, out=None):
        return bitpack.unpack_range(self._windows, self.bit_width, lo, hi, out=out)

    def values(self):
        return self.range(0, self.count)

    def __eq__(self, other):
        if not isinstance(other, ResidualArray):
            return NotImplemented
        return (self.bit_width, self.count, self.payload) == (other.bit_width, other.count, other.payload)

    __hash__ = None


@dataclass(frozen=True, eq=True)
class CompressedList:
    """A key list encoded as (segments, biased residuals).

    ``residuals`` is ``None`` for the segments-only form used by approximate
    queries; such a list cannot be decoded losslessly.
    """

    epsilon: int
    n: int
    key_width: KeyWidth
    base: int
    segments: tuple
    residuals: ResidualArray = field(default=None)

    @property
    def has_residuals(self):
        return self.residuals is not None

    @property
    def num_segments(self):
        return len(self.segments)

    def segments_only(self):
        return CompressedList(self.epsilon, self.n, self.key_width, self.base, self.segments, None)

    @cached_property
    def starts(self):
        return np.fromiter((s.start for s in self.segments), dtype=np.int64, count=len(self.segments))

    @cached_property
    def ends(self):
        """Exclusive end position of each segment."""
        e = np.empty(len(self.segments), dtype=np.int64)
        e[:-1] = self.starts[1:]
        e[-1] = self.n
        return e

    @cached_property
    def slopes(self):
        return np.fromiter((s.slope for s in self.segments), dtype=np.float64, count=len(self.segments))

    @cached_property
    def intercepts(self):
        return np.fromiter((s.intercept for s in self.segments), dtype=np.float64, count=len(self.segments))

    @cached_property
    def anchors(self):
        return segment_anchors(self.starts, self.slopes, self.intercepts, self.n)

    @cached_property
    def _start_list(self):
        return self.starts.tolist()

    def segment_index(self, i):
        """Index of the segment covering position ``i`` (binary search over starts)."""
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"position {i} outside [0, {self.n})")
        return bisect.bisect_right(self._start_list, i) - 1

    def predict_at(self, i, j=None):
        """Absolute model prediction (base and anchor included) for position ``i``."""
        if j is None:
            j = self.segment_index(i)
        return self.base + int(self.anchors[j]) + predict(self.segments[j], i)

    def require_residuals(self):
        if self.residuals is None:
            raise MissingResiduals("list was stored without residuals (segments-only)")
        return self.residuals
