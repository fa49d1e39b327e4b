"""LCI1 container, partition plans and corpus ingestion.

LCI1 layout (little-endian throughout)::

    header   35 bytes  magic "LCI1", version u8, key_width u8, epsilon u32,
                       n u64, segment_count u64, flags u8, base u64
    segments 12 bytes each: start u32, slope f32, intercept f32
    residual ceil(n * b / 8) bytes, b = ceil(log2(2*epsilon + 1)),
             zero padded to a multiple of 8 bytes

``flags`` bit 0 marks the residual section as present; a segments-only file
(approximate queries) clears it and ends after the segment table. ``base`` is
the first key; each segment's intercept is relative to its anchor (see
:func:`lcomp.core.segment_anchors`).

A partition plan ("LCP1") is a 16-byte header (magic, version u8, 3 reserved
bytes, partition count u64) followed by the partitions' LCI1 blobs back to back.
"""
import struct

import numpy as np

from .core import (
    SEGMENT_BYTES,
    CompressedList,
    KeyWidth,
    ResidualArray,
    Segment,
    SortedKeyList,
    residual_bit_width,
)
from .errors import (
    BadMagic,
    CorruptPayload,
    NonMonotoneSegments,
    ParseError,
    SegmentStartOverflow,
    TruncatedPayload,
    UnsortedInput,
    UnsupportedVersion,
)

MAGIC = b"LCI1"
VERSION = 1
FLAG_RESIDUALS = 0x01
HEADER = struct.Struct("<4sBBIQQBQ")
HEADER_BYTES = HEADER.size
HEADER_BITS = 8 * HEADER_BYTES
RESIDUAL_ALIGN = 8

PLAN_MAGIC = b"LCP1"
PLAN_HEADER = struct.Struct("<4sB3xQ")
PLAN_HEADER_BITS = 8 * PLAN_HEADER.size

_SEGMENT = np.dtype([("start", "<u4"), ("slope", "<f4"), ("intercept", "<f4")])
assert _SEGMENT.itemsize == SEGMENT_BYTES

CORPUS_FORMATS = ("text", "u32", "u64")
_FORMAT_ALIASES = {"text-lines": "text", "binary-u32": "u32", "binary-u64": "u64"}


def residual_section_bytes(n, epsilon):
    """(payload bytes, padding bytes) of the residual section."""
    raw = (n * residual_bit_width(epsilon) + 7) // 8
    return raw, -raw % RESIDUAL_ALIGN


def serialized_size(n, epsilon, segment_count, residuals=True):
    size = HEADER_BYTES + SEGMENT_BYTES * segment_count
    if residuals:
        raw, pad = residual_section_bytes(n, epsilon)
        size += raw + pad
    return size


def serialize(c):
    if c.n >= 1 << 64 or c.epsilon >= 1 << 32:
        raise ValueError("n or epsilon does not fit the header fields")
    starts = c.starts
    if starts.size and int(starts[-1]) >= 1 << 32:
        raise SegmentStartOverflow("segment start does not fit in u32; partition the list")
    flags = FLAG_RESIDUALS if c.has_residuals else 0
    head = HEADER.pack(MAGIC, VERSION, int(c.key_width), c.epsilon, c.n, len(c.segments), flags, c.base)
    table = np.empty(len(c.segments), dtype=_SEGMENT)
    table["start"] = starts
    table["slope"] = c.slopes
    table["intercept"] = c.intercepts
    parts = [head, table.tobytes()]
    if c.has_residuals:
        payload = c.residuals.payload
        parts.append(payload)
        parts.append(b"\x00" * (-len(payload) % RESIDUAL_ALIGN))
    return b"".join(parts)


def _read_header(data, offset=0):
    if len(data) - offset < 4 or bytes(data[offset:offset + 4]) != MAGIC:
        raise BadMagic("not an LCI1 stream")
    if len(data) - offset < HEADER_BYTES:
        raise TruncatedPayload("header cut short")
    magic, version, width, eps, n, nseg, flags, base = HEADER.unpack_from(data, offset)
    if version != VERSION:
        raise UnsupportedVersion(f"LCI1 version {version} (expected {VERSION})")
    if width not in (32, 64):
        raise CorruptPayload(f"key width {width}")
    if n == 0 or nseg == 0 or nseg > n:
        raise CorruptPayload(f"inconsistent counts n={n} segments={nseg}")
    if flags & ~FLAG_RESIDUALS:
        raise CorruptPayload(f"unknown flags {flags:#x}")
    return version, KeyWidth(width), eps, n, nseg, flags, base


def _deserialize_at(data, offset):
    _, width, eps, n, nseg, flags, base = _read_header(data, offset)
    pos = offset + HEADER_BYTES
    seg_end = pos + SEGMENT_BYTES * nseg
    if len(data) < seg_end:
        raise TruncatedPayload("segment table cut short")
    table = np.frombuffer(data, dtype=_SEGMENT, count=nseg, offset=pos)
    starts = table["start"].astype(np.int64)
    if starts[0] != 0 or (nseg > 1 and not (np.diff(starts) > 0).all()) or starts[-1] >= n:
        raise NonMonotoneSegments("segment starts must begin at 0 and increase below n")
    slopes = table["slope"].astype(np.float64)
    icepts = table["intercept"].astype(np.float64)
    if not (np.isfinite(slopes).all() and np.isfinite(icepts).all()):
        raise CorruptPayload("non-finite segment parameter")
    segments = tuple(Segment(int(s), float(a), float(b)) for s, a, b in zip(starts, slopes, icepts))
    end = seg_end
    residuals = None
    if flags & FLAG_RESIDUALS:
        raw, pad = residual_section_bytes(n, eps)
        if len(data) < seg_end + raw + pad:
            raise TruncatedPayload("residual section cut short")
        residuals = ResidualArray(residual_bit_width(eps), bytes(data[seg_end:seg_end + raw]), n)
        end = seg_end + raw + pad
    return CompressedList(eps, n, width, base, segments, residuals), end


def deserialize(data):
    """Inverse of :func:`serialize`; rejects trailing bytes."""
    c, end = _deserialize_at(data, 0)
    if end != len(data):
        raise CorruptPayload(f"{len(data) - end} trailing bytes after LCI1 payload")
    return c


def serialize_plan(parts):
    """Pack the compressed partitions of a plan, in key order."""
    return PLAN_HEADER.pack(PLAN_MAGIC, VERSION, len(parts)) + b"".join(serialize(c) for c in parts)


def deserialize_plan(data):
    if len(data) < 4 or bytes(data[:4]) != PLAN_MAGIC:
        raise BadMagic("not an LCP1 stream")
    if len(data) < PLAN_HEADER.size:
        raise TruncatedPayload("plan header cut short")
    _, version, count = PLAN_HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise UnsupportedVersion(f"LCP1 version {version}")
    pos = PLAN_HEADER.size
    parts = []
    for _ in range(count):
        c, pos = _deserialize_at(data, pos)
        parts.append(c)
    if pos != len(data):
        raise CorruptPayload("trailing bytes after last partition")
    return parts


# -- corpora -------------------------------------------------------------------

def ingest_keys(path, fmt="text", width=None):
    """Read one sorted key list. ``fmt`` is ``text`` (one decimal per line), ``u32`` or ``u64``."""
    fmt = _FORMAT_ALIASES.get(fmt, fmt)
    if fmt == "text":
        keys = []
        with open(path, "rb") as fh:
            for lineno, line in enumerate(fh, 1):
                try:
                    line = line.decode("ascii")
                except UnicodeDecodeError:
                    raise ParseError(f"{path}:{lineno}: non-ASCII bytes") from None
                tok = line.strip()
                if not tok:
                    continue
                if not tok.isdigit():
                    raise ParseError(f"{path}:{lineno}: not an unsigned integer: {tok!r}")
                v = int(tok)
                if v >= 1 << 64:
                    raise ParseError(f"{path}:{lineno}: key exceeds 64 bits")
                keys.append(v)
        arr = np.array(keys, dtype=np.uint64)
    elif fmt in ("u32", "u64"):
        dtype = "<u4" if fmt == "u32" else "<u8"
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) % np.dtype(dtype).itemsize:
            raise ParseError(f"{path}: size {len(raw)} is not a multiple of {np.dtype(dtype).itemsize}")
        arr = np.frombuffer(raw, dtype=dtype).astype(np.uint64)
        if width is None:
            width = 32 if fmt == "u32" else 64
    else:
        raise ValueError(f"unknown key format {fmt!r}; choose from {CORPUS_FORMATS}")
    return SortedKeyList.of(arr, width)


def write_keys(path, keys, fmt="text"):
    keys = SortedKeyList.of(keys)
    fmt = _FORMAT_ALIASES.get(fmt, fmt)
    if fmt == "text":
        with open(path, "w", encoding="ascii") as fh:
            fh.write("".join(f"{int(k)}\n" for k in keys.keys))
    elif fmt in ("u32", "u64"):
        dtype = "<u4" if fmt == "u32" else "<u8"
        if fmt == "u32" and len(keys) and int(keys.keys[-1]) >= 1 << 32:
            raise ValueError("keys exceed 32 bits")
        with open(path, "wb") as fh:
            fh.write(keys.keys.astype(dtype).tobytes())
    else:
        raise ValueError(f"unknown key format {fmt!r}")


def iter_corpus(path, min_len=1):
    """Yield lists from a u32 count-prefixed corpus: ``[len, k1 .. klen]`` repeated."""
    raw = np.fromfile(path, dtype="<u4")
    pos = 0
    index = 0
    while pos < raw.size:
        count = int(raw[pos])
        pos += 1
        if pos + count > raw.size:
            raise ParseError(f"{path}: list {index} declares {count} keys past end of file")
        if count >= min_len:
            try:
                yield SortedKeyList.of(raw[pos:pos + count], 32)
            except UnsortedInput as exc:
                raise type(exc)(f"{path}: list {index}: {exc}") from None
        pos += count
        index += 1


def write_corpus(path, lists):
    with open(path, "wb") as fh:
        for keys in lists:
            keys = SortedKeyList.of(keys)
            fh.write(np.uint32(len(keys)).astype("<u4").tobytes())
            fh.write(keys.keys.astype("<u4").tobytes())
