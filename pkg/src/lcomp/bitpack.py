"""Fixed-width little-endian bit packing.

Value ``i`` of width ``b`` occupies stream bits ``[i*b, (i+1)*b)``, where stream
bit ``j`` is bit ``j % 8`` of byte ``j // 8``. Decoding uses unaligned 64-bit
window loads followed by shift and mask, so there is no per-value branching.
"""
import numpy as np

# values per packing chunk; a multiple of 8 keeps every chunk byte aligned
_PACK_CHUNK = 1 << 16
# trailing zero bytes so a 64-bit window load (plus the ninth byte read for
# widths above 57) never runs off the buffer
WINDOW_SLACK = 16


def packed_nbytes(count, width):
    return (count * width + 7) // 8


def pack(values, width):
    """Pack unsigned integers (each < 2**width) into bytes."""
    values = np.ascontiguousarray(values, dtype=np.uint64)
    if width == 0 or values.size == 0:
        return b""
    if not 0 < width <= 64:
        raise ValueError(f"bit width {width} outside [0, 64]")
    shifts = np.arange(width, dtype=np.uint64)
    out = []
    for lo in range(0, values.size, _PACK_CHUNK):
        chunk = values[lo:lo + _PACK_CHUNK]
        bits = ((chunk[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
        out.append(np.packbits(bits.ravel(), bitorder="little").tobytes())
    return b"".join(out)


def window_view(payload):
    """Return a uint64 array whose element ``k`` is the 8 bytes starting at byte ``k``.

    ``payload`` must already carry :data:`WINDOW_SLACK` trailing bytes.
    """
    buf = np.frombuffer(payload, dtype=np.uint8)
    return np.ndarray((max(buf.size - 7, 0),), dtype="<u8", buffer=buf, strides=(1,))


def padded(payload):
    return bytes(payload) + b"\x00" * WINDOW_SLACK


def unpack_range(windows, width, lo, hi, out=None):
    """Decode values ``lo..hi-1`` from a window view made by :func:`window_view`."""
    count = hi - lo
    if out is None:
        out = np.empty(count, dtype=np.uint64)
    if width == 0:
        out[:] = 0
        return out
    bitpos = np.arange(lo, hi, dtype=np.uint64) * np.uint64(width)
    offset = (bitpos >> np.uint64(3)).astype(np.intp)
    shift = bitpos & np.uint64(7)
    np.right_shift(windows[offset], shift, out=out)
    if width > 57:
        # value can straddle the 64-bit window; pull the ninth byte in
        spill = windows[offset + 8] & np.uint64(0xFF)
        hi_part = np.where(shift > 0, spill << (np.uint64(64) - shift), np.uint64(0))
        out |= hi_part
    if width < 64:
        out &= np.uint64((1 << width) - 1)
    return out


def unpack(payload, width, count):
    return unpack_range(window_view(padded(payload)), width, 0, count)


def unpack_one(payload, width, i):
    """Scalar decode of a single value straight from bytes (reference path)."""
    if width == 0:
        return 0
    bitpos = i * width
    o = bitpos >> 3
    word = int.from_bytes(payload[o:o + 9], "little")
    return (word >> (bitpos & 7)) & ((1 << width) - 1)
