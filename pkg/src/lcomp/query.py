"""Queries answered directly on compressed lists.

Every segment bounds the keys it covers: keys at its first and last positions
lie within ``epsilon`` of the model there, and keys are increasing, so the
segment's keys sit inside ``[pred(first) - eps, pred(last) + eps]``. Intersection
uses those ranges the way a conventional codec uses skip pointers.
"""
import math
from dataclasses import dataclass

import numpy as np

from .codec import decompress, decompress_range
from .core import SortedKeyList, KeyWidth
from .errors import InvalidQuantile

# slopes below this are treated as flat and searched by bisection
_FLAT_SLOPE = 1e-9
# windows up to this many positions are scanned key by key instead of block-decoded
_SCAN_WINDOW = 8


@dataclass(frozen=True)
class SegmentKeyRange:
    lo_key: int
    hi_key: int
    lo_idx: int
    hi_idx: int


@dataclass
class QueryStats:
    """Counters filled in by instrumented queries.

    ``interior_reads`` counts decoded residuals at positions other than a list's
    first and last; reading those two is how a query learns a list's key span.
    """

    residual_reads: int = 0
    interior_reads: int = 0
    segments_decoded: int = 0
    segments_pruned: int = 0

    def record(self, c, lo, hi):
        count = hi - lo
        if count <= 0:
            return
        last = c.n - 1
        edges = (lo == 0) + (lo <= last < hi and last != 0)
        self.residual_reads += count
        self.interior_reads += count - edges


def segment_key_range(c, j):
    lo_idx = int(c.starts[j])
    hi_idx = int(c.ends[j]) - 1
    return SegmentKeyRange(
        c.predict_at(lo_idx, j) - c.epsilon,
        c.predict_at(hi_idx, j) + c.epsilon,
        lo_idx,
        hi_idx,
    )


def _key(c, i, stats):
    if stats is not None:
        stats.record(c, i, i + 1)
    j = c.segment_index(i)
    return c.predict_at(i, j) + c.residuals.get(i) - c.epsilon


def _keys(c, lo, hi, stats):
    if stats is not None:
        stats.record(c, lo, hi)
        stats.segments_decoded += 1
    return decompress_range(c, lo, hi)


def _quantile_index(n, k, q):
    if q <= 0 or not 1 <= k <= q:
        raise InvalidQuantile(f"need 1 <= k <= q and q > 0, got k={k} q={q}")
    return min(n * k // q, n - 1)


def quantile_exact(c, k, q):
    """k-th q-quantile: the key at position ``min(floor(N*k/q), N-1)``."""
    c.require_residuals()
    return _key(c, _quantile_index(c.n, k, q), None)


def quantile_approx(c, k, q):
    """Model-only estimate of the k-th q-quantile, within ``epsilon`` of the exact one.

    Works on segments-only lists; the estimate is clamped to the key universe.
    """
    i = _quantile_index(c.n, k, q)
    est = c.predict_at(i)
    return min(max(est, 0), (1 << int(c.key_width)) - 1)


def _window(c, j, x):
    """Candidate positions for the first key >= x inside segment j, from inverting the model."""
    s = int(c.starts[j])
    e = int(c.ends[j]) - 1
    seg = c.segments[j]
    if seg.slope <= _FLAT_SLOPE:
        return s, e
    t = x - c.base - int(c.anchors[j]) - seg.intercept
    eps = c.epsilon
    lo = s + math.ceil((t - eps) / seg.slope) - 1
    hi = s + math.ceil((t + eps + 1) / seg.slope) + 1
    return max(lo, s), min(hi, e)


def next_geq(c, x, stats=None):
    """Smallest position whose key is >= x, as ``(index, key)``; ``None`` past the last key."""
    c.require_residuals()
    n = c.n
    first = _key(c, 0, stats)
    if x <= first:
        return 0, first
    last = _key(c, n - 1, stats) if n > 1 else first
    if x > last:
        return None
    ends = c.ends
    lo_j, hi_j = 0, len(c.segments) - 1
    while lo_j < hi_j:
        mid = (lo_j + hi_j) // 2
        e = int(ends[mid]) - 1
        pred = c.predict_at(e, mid)
        if pred + c.epsilon < x:
            lo_j = mid + 1
        elif pred - c.epsilon >= x:
            hi_j = mid
        elif _key(c, e, stats) >= x:
            hi_j = mid
        else:
            lo_j = mid + 1
    j = lo_j
    s = int(c.starts[j])
    e = int(ends[j]) - 1
    w_lo, w_hi = _window(c, j, x)
    if w_lo <= w_hi and w_hi - w_lo < _SCAN_WINDOW:
        if w_lo == s or _key(c, w_lo - 1, stats) < x:
            for i in range(w_lo, w_hi + 1):
                k = _key(c, i, stats)
                if k >= x:
                    return i, k
    elif w_lo <= w_hi:
        keys = _keys(c, w_lo, w_hi + 1, stats)
        p = int(np.searchsorted(keys, np.uint64(x), side="left"))
        below_ok = p > 0 or w_lo == s or _key(c, w_lo - 1, stats) < x
        above_ok = p < keys.size
        if below_ok and above_ok:
            return w_lo + p, int(keys[p])
    keys = _keys(c, s, e + 1, stats)
    p = int(np.searchsorted(keys, np.uint64(x), side="left"))
    return s + p, int(keys[p])


def _bounds(c, stats):
    first = _key(c, 0, stats)
    last = _key(c, c.n - 1, stats) if c.n > 1 else first
    return first, last


def _result(keys, *lists):
    width = max(int(c.key_width) for c in lists)
    return SortedKeyList(np.asarray(keys, dtype=np.uint64), KeyWidth(width))


def intersect(a, b, stats=None):
    """Keys present in both lists (AND).

    Walks the shorter list's segments, skipping any whose key range misses the
    other list, and locates matching stretches of the other list with
    :func:`next_geq` instead of decoding it whole.
    """
    a.require_residuals()
    b.require_residuals()
    if a.n > b.n:
        a, b = b, a
    a_first, a_last = _bounds(a, stats)
    b_first, b_last = _bounds(b, stats)
    lo = max(a_first, b_first)
    hi = min(a_last, b_last)
    if lo > hi:
        if stats is not None:
            stats.segments_pruned += len(a.segments)
        return _result([], a, b)
    out = []
    for j in range(len(a.segments)):
        rng = segment_key_range(a, j)
        if rng.hi_key < lo:
            _prune(stats)
            continue
        if rng.lo_key > hi:
            _prune(stats, len(a.segments) - j)
            break
        found = next_geq(b, max(rng.lo_key, lo), stats)
        if found is None:
            _prune(stats, len(a.segments) - j)
            break
        b_lo, b_key = found
        if b_key > rng.hi_key:
            _prune(stats)
            continue
        ka = _keys(a, rng.lo_idx, rng.hi_idx + 1, stats)
        ka = ka[(ka >= np.uint64(b_key)) & (ka <= np.uint64(hi))]
        if ka.size == 0:
            continue
        after = next_geq(b, int(ka[-1]) + 1, stats)
        b_hi = after[0] if after is not None else b.n
        kb = _keys(b, b_lo, b_hi, stats)
        out.append(np.intersect1d(ka, kb, assume_unique=True))
    keys = np.concatenate(out) if out else []
    return _result(keys, a, b)


def _prune(stats, count=1):
    if stats is not None:
        stats.segments_pruned += count


def union(a, b, stats=None):
    """Keys present in either list (OR)."""
    ka = decompress(a).keys
    kb = decompress(b).keys
    if stats is not None:
        stats.record(a, 0, a.n)
        stats.record(b, 0, b.n)
        stats.segments_decoded += len(a.segments) + len(b.segments)
    if ka[-1] < kb[0]:
        keys = np.concatenate([ka, kb])
    elif kb[-1] < ka[0]:
        keys = np.concatenate([kb, ka])
    else:
        keys = np.union1d(ka, kb)
    return _result(keys, a, b)
