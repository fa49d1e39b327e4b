"""Optimal streaming epsilon-PLA fitting.

A segment starting at position ``s`` is feasible for keys ``y[s..e)`` when one
line ``f`` satisfies ``|y[i] - floor(f(i - s))| <= eps`` for every ``i``. For
integer keys that is exactly the half-open tube ``y - eps <= f < y + eps + 1``.

The streaming hull below decides feasibility with integer arithmetic only. The
strict upper edge is turned into a closed one by scaling every ordinate by
``D`` and lowering the upper edge by one unit: with ``D`` above the segment
length, a line fits the closed tube ``[D(y - eps), D(y + eps + 1) - 1]`` iff it
fits the original half-open one. Greedily extending each segment as far as it
stays feasible yields the minimum number of segments, because feasibility of a
range implies feasibility of every sub-range.

Stored parameters are float32. After choosing a line inside the feasible region
the fitter rounds it, re-checks every floored residual in float64, and only on
failure refits the segment with a narrower internal tube.
"""
import math
from dataclasses import dataclass

import numpy as np

from .core import MAX_RELATIVE_SPAN, Segment, SortedKeyList, f32, model_values
from .errors import EmptyInput, IndexOutOfRange, PrecisionError

# segments at least this long are verified with numpy rather than a Python loop
_NUMPY_VERIFY_MIN = 48
# float32 neighbours of the ideal slope tried before shrinking the tube
_SLOPE_STEPS = 6


class StreamHull:
    """Feasible-line tracker for a single segment.

    Points are fed left to right as ``(x, lo, up)`` in scaled integer units;
    :meth:`add` returns ``False`` (leaving the state untouched) when no line
    through all closed intervals ``[lo, up]`` seen so far remains.
    """

    __slots__ = ("n", "upper", "lower", "ustart", "lstart", "r0", "r1", "r2", "r3")

    def __init__(self):
        self.n = 0

    def reset(self):
        self.n = 0

    def add(self, x, lo, up):
        n = self.n
        if n == 0:
            self.r0 = (x, up)
            self.r1 = (x, lo)
            self.upper = [(x, up)]
            self.lower = [(x, lo)]
            self.ustart = self.lstart = 0
            self.n = 1
            return True
        if n == 1:
            self.r2 = (x, lo)
            self.r3 = (x, up)
            self.upper.append((x, up))
            self.lower.append((x, lo))
            self.n = 2
            return True

        r0x, r0y = self.r0
        r1x, r1y = self.r1
        r2x, r2y = self.r2
        r3x, r3y = self.r3
        # min-slope line r0 -> r2, max-slope line r1 -> r3
        s1dx = r2x - r0x
        s1dy = r2y - r0y
        s2dx = r3x - r1x
        s2dy = r3y - r1y
        if (up - r2y) * s1dx < s1dy * (x - r2x):
            return False
        if (lo - r3y) * s2dx > s2dy * (x - r3x):
            return False

        if (up - r1y) * s2dx < s2dy * (x - r1x):
            lower = self.lower
            best = self.lstart
            bx, by = lower[best]
            for i in range(best + 1, len(lower)):
                cx, cy = lower[i]
                if (up - cy) * (x - bx) > (up - by) * (x - cx):
                    break
                best = i
                bx, by = cx, cy
            self.r1 = (bx, by)
            self.r3 = (x, up)
            self.lstart = best
            upper = self.upper
            ustart = self.ustart
            while len(upper) >= ustart + 2:
                (ax, ay), (mx, my) = upper[-2], upper[-1]
                if (mx - ax) * (up - ay) - (my - ay) * (x - ax) > 0:
                    break
                upper.pop()
            upper.append((x, up))

        if (lo - r0y) * s1dx > s1dy * (x - r0x):
            upper = self.upper
            best = self.ustart
            bx, by = upper[best]
            for i in range(best + 1, len(upper)):
                cx, cy = upper[i]
                if (lo - cy) * (x - bx) < (lo - by) * (x - cx):
                    break
                best = i
                bx, by = cx, cy
            self.r0 = (bx, by)
            self.r2 = (x, lo)
            self.ustart = best
            lower = self.lower
            lstart = self.lstart
            while len(lower) >= lstart + 2:
                (ax, ay), (mx, my) = lower[-2], lower[-1]
                if (mx - ax) * (lo - ay) - (my - ay) * (x - ax) < 0:
                    break
                lower.pop()
            lower.append((x, lo))

        self.n = n + 1
        return True

    def mid_line(self):
        """Average of the two extreme feasible lines, as (slope, intercept) in scaled units."""
        if self.n == 1:
            (x, up), (_, lo) = self.r0, self.r1
            return 0.0, (lo + up) / 2
        (r0x, r0y), (r1x, r1y), (r2x, r2y), (r3x, r3y) = self.r0, self.r1, self.r2, self.r3
        a1 = (r2y - r0y) / (r2x - r0x)
        a2 = (r3y - r1y) / (r3x - r1x)
        b1 = r0y - a1 * r0x
        b2 = r1y - a2 * r1x
        return (a1 + a2) / 2, (b1 + b2) / 2


@dataclass(frozen=True)
class FitResult:
    segments: tuple
    epsilon: int
    max_abs_residual: int
    residuals: np.ndarray  # signed, int64, one per key

    @property
    def num_segments(self):
        return len(self.segments)


def relative_keys(keys):
    """Keys minus the first key, as int64; raises if float64 could not hold them exactly."""
    k = keys.keys
    span = int(k[-1]) - int(k[0])
    if span >= MAX_RELATIVE_SPAN:
        raise PrecisionError(f"key span {span} exceeds 2**53; partition the list first")
    return (k - k[0]).astype(np.int64)


def _scale(length):
    return length + 1


def greedy_extent(y, start, epsilon, scale, stop=None):
    """End (exclusive) of the longest feasible segment beginning at ``start``."""
    stop = len(y) if stop is None else stop
    hull = StreamHull()
    y0 = y[start]
    e1 = epsilon + 1
    i = start
    while i < stop:
        d = y[i] - y0
        if not hull.add(i - start, scale * (d - epsilon), scale * (d + e1) - 1):
            break
        i += 1
    return i, hull


def greedy_ends(y, epsilon, start=0, stop=None, scale=None):
    """Yield the exclusive end of each greedy segment covering ``y[start:stop]``."""
    stop = len(y) if stop is None else stop
    if scale is None:
        scale = _scale(stop - start)
    hull = StreamHull()
    add = hull.add
    e1 = epsilon + 1
    s = start
    y0 = y[s] if s < stop else 0
    for i in range(start, stop):
        d = y[i] - y0
        if not add(i - s, scale * (d - epsilon), scale * (d + e1) - 1):
            yield i
            hull.reset()
            s = i
            y0 = y[i]
            add(0, -scale * epsilon, scale * e1 - 1)
    if stop > start:
        yield stop


def count_segments(keys, epsilon):
    """Minimum segment count under exact arithmetic (no float32 quantization)."""
    keys = SortedKeyList.of(keys)
    if len(keys) == 0:
        raise EmptyInput("cannot fit an empty key list")
    y = relative_keys(keys).tolist()
    return sum(1 for _ in greedy_ends(y, epsilon))


def segment_counts_from(y, start, epsilon, scale=None):
    """``out[m]`` = greedy segment count for ``y[start:start+m+1]``, for every prefix length."""
    out = np.empty(len(y) - start, dtype=np.int64)
    count = 0
    prev = start
    for end in greedy_ends(y, epsilon, start, scale=scale):
        count += 1
        out[prev - start:end - start] = count
        prev = end
    return out


def feasible(keys, lo, hi, epsilon):
    """True iff one line keeps every floored prediction within ``epsilon`` on ``keys[lo..hi]``."""
    keys = SortedKeyList.of(keys)
    n = len(keys)
    if not 0 <= lo <= hi < n:
        raise IndexOutOfRange(f"range [{lo}, {hi}] outside [0, {n})")
    y = keys.keys[lo:hi + 1].astype(object)
    y = [int(v) - int(y[0]) for v in y]
    end, _ = greedy_extent(y, 0, epsilon, _scale(len(y)))
    return end == len(y)


def _verify(y, start, end, epsilon, slope, intercept, anchor, ys=None):
    if ys is not None:
        pred = np.floor(slope * np.arange(end - start, dtype=np.float64) + intercept)
        return bool(np.abs(ys - pred).max() <= epsilon)
    floor = math.floor
    x = 0.0
    for i in range(start, end):
        if abs(y[i] - anchor - floor(slope * x + intercept)) > epsilon:
            return False
        x += 1.0
    return True


def _intercept_for(y, start, end, epsilon, slope, anchor, ys=None):
    """Midpoint of the intercept interval that keeps every point in the tube for ``slope``."""
    if ys is not None:
        t = slope * np.arange(end - start, dtype=np.float64)
        lo = float((ys - epsilon - t).max())
        hi = float((ys + epsilon + 1 - t).min())
    else:
        lo = -math.inf
        hi = math.inf
        x = 0.0
        for i in range(start, end):
            t = slope * x + anchor
            v = y[i] - epsilon - t
            if v > lo:
                lo = v
            v = y[i] + epsilon + 1 - t
            if v < hi:
                hi = v
            x += 1.0
    if not hi > lo:
        return None
    return f32((lo + hi) / 2)


def _f32_neighbours(a, steps):
    """``a`` first, then float32 values alternately above and below it."""
    yield a
    arr = np.float32(a)
    up = down = arr
    for _ in range(steps):
        up = np.nextafter(up, np.float32(np.inf))
        down = np.nextafter(down, np.float32(-np.inf))
        yield float(up)
        yield float(down)


def _quantize(y, start, end, epsilon, slope, anchor, ys=None):
    """Float32 (slope, intercept) for ``y[start:end]`` within ``epsilon``, or None."""
    if end - start == 1:
        candidates = [0.0]
    else:
        try:
            candidates = _f32_neighbours(f32(slope), _SLOPE_STEPS)
        except OverflowError:
            return None
    for a in candidates:
        b = _intercept_for(y, start, end, epsilon, a, anchor, ys)
        if b is None:
            continue
        for bb in _f32_neighbours(b, 2):
            if _verify(y, start, end, epsilon, a, bb, anchor, ys):
                return a, bb
    return None


def _fit_one(y, start, end, hull, scale, epsilon, anchor, ys_all):
    slope = hull.mid_line()[0] / scale
    ys = None
    if ys_all is not None and end - start >= _NUMPY_VERIFY_MIN:
        ys = ys_all[start:end] - anchor
    return _quantize(y, start, end, epsilon, slope, anchor, ys)


def _refit(y, start, stop, epsilon, scale, anchor, ys_all):
    """Fallback when float32 rounding broke the greedy segment: narrow the tube, then shorten."""
    for inner in range(epsilon - 1, -1, -1):
        end, hull = greedy_extent(y, start, inner, scale, stop)
        params = _fit_one(y, start, end, hull, scale, epsilon, anchor, ys_all)
        if params is not None:
            return end, params
    end, _ = greedy_extent(y, start, 0, scale, stop)
    while end - start > 1:
        end = start + (end - start) // 2
        _, hull = greedy_extent(y, start, epsilon, scale, end)
        params = _fit_one(y, start, end, hull, scale, epsilon, anchor, ys_all)
        if params is not None:
            return end, params
    params = _quantize(y, start, start + 1, epsilon, 0.0, anchor)
    if params is None:
        raise PrecisionError(
            f"no float32 intercept reaches offset {y[start] - anchor} within epsilon={epsilon}; "
            "use a larger epsilon or partition the list")
    return start + 1, params


def fit(keys, epsilon):
    """Fit the minimum-size epsilon-PLA of ``keys`` (positions -> keys).

    Returns a :class:`FitResult` whose segments carry float32 parameters and
    whose intercepts are relative to the first key.
    """
    keys = SortedKeyList.of(keys)
    if len(keys) == 0:
        raise EmptyInput("cannot fit an empty key list")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    rel = relative_keys(keys)
    y = rel.tolist()
    n = len(y)
    scale = _scale(n)
    ys_all = rel.astype(np.float64) if n >= _NUMPY_VERIFY_MIN else None

    segments = []
    anchor = 0
    hull = StreamHull()
    add = hull.add
    e1 = epsilon + 1
    s = 0
    y0 = 0
    i = 0
    while i < n:
        d = y[i] - y0
        if add(i - s, scale * (d - epsilon), scale * (d + e1) - 1):
            i += 1
            if i < n:
                continue
        end = i
        params = _fit_one(y, s, end, hull, scale, epsilon, anchor, ys_all)
        if params is None:
            end, params = _refit(y, s, end, epsilon, scale, anchor, ys_all)
        segments.append(Segment(s, params[0], params[1]))
        if end >= n:
            break
        anchor += math.floor(params[0] * float(end - s) + params[1])
        s = i = end
        y0 = y[s]
        hull.reset()

    residuals = _residuals(rel, segments, n)
    max_abs = int(np.abs(residuals).max())
    assert max_abs <= epsilon, "fitter produced an out-of-bound residual"
    return FitResult(tuple(segments), epsilon, max_abs, residuals)


def _residuals(rel, segments, n):
    starts = np.array([s.start for s in segments], dtype=np.int64)
    slopes = np.array([s.slope for s in segments], dtype=np.float64)
    icepts = np.array([s.intercept for s in segments], dtype=np.float64)
    return rel - model_values(starts, slopes, icepts, n)
