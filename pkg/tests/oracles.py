"""Brute-force reference implementations used only by the tests.

None of these share code with the library paths they check.
"""
import itertools
from fractions import Fraction

import numpy as np


def _violations_from(y, eps, a):
    """Boolean matrix V[b, c] for fixed a: points a < b < c admit no common line.

    A line must satisfy ``y - eps <= f(x) < y + eps + 1``. These are half-planes in
    (slope, intercept) space, so by Helly's theorem the whole system is feasible iff
    every three constraints are. The only triples that can fail are two lower bounds
    around an upper bound, or two upper bounds around a lower bound. Equality
    counts as a violation because the upper edges are strict. Integer
    arithmetic throughout.
    """
    n = len(y)
    lo = y - eps
    up = y + eps + 1
    b = np.arange(n)[:, None]
    c = np.arange(n)[None, :]
    order = (a < b) & (b < c)
    span = c - a
    left = c - b
    right = b - a
    t1 = up[b] * span <= lo[a] * left + lo[c] * right
    t2 = lo[b] * span >= up[a] * left + up[c] * right
    return order & (t1 | t2)


def violating_triples(y, eps):
    """Boolean cube V[a, b, c]; tiny n only."""
    y = np.asarray(y, dtype=np.int64)
    return np.stack([_violations_from(y, eps, a) for a in range(len(y))])


def max_reach(y, eps):
    """reach[lo] = largest hi such that y[lo..hi] fits one segment."""
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    first_c = np.full(n, n, dtype=np.int64)
    for a in range(n):
        cs = np.nonzero(_violations_from(y, eps, a).any(axis=0))[0]
        if cs.size:
            first_c[a] = cs.min()
    # a range starting at lo is blocked by any triple with a >= lo
    suffix = np.minimum.accumulate(first_c[::-1])[::-1]
    return suffix - 1


def feasible_triples(y, lo, hi, eps):
    return bool(max_reach(list(y[lo:hi + 1]), eps)[0] >= hi - lo)


def min_segments_dp(y, eps):
    """Minimum number of contiguous segments, by dynamic programming over all splits."""
    n = len(y)
    reach = max_reach(y, eps)
    inf = n + 1
    dp = [0] + [inf] * n
    for j in range(1, n + 1):
        for i in range(j):
            if reach[i] >= j - 1 and dp[i] + 1 < dp[j]:
                dp[j] = dp[i] + 1
    return dp[n]


def _solve3(rows, rhs):
    """Exact 3x3 solve via Cramer's rule; None when singular."""
    def det(m):
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    d = det(rows)
    if d == 0:
        return None
    out = []
    for k in range(3):
        m = [list(r) for r in rows]
        for r in range(3):
            m[r][k] = rhs[r]
        out.append(Fraction(det(m), d))
    return out


def feasible_lp(y, eps):
    """Exact strict feasibility by vertex enumeration of a 3-variable LP.

    maximise t  s.t.  a*x + b >= y - eps,  a*x + b + t <= y + eps + 1,  t <= 1.
    The half-open tube is feasible iff the optimum t is positive. Tiny n only.
    """
    n = len(y)
    if n <= 1:
        return True
    # constraints as (coef_a, coef_b, coef_t) . v <= rhs
    cons = []
    for x, v in enumerate(y):
        cons.append(((-x, -1, 0), -(v - eps)))
        cons.append(((x, 1, 1), v + eps + 1))
    cons.append(((0, 0, 1), 1))
    best = None
    for trio in itertools.combinations(cons, 3):
        sol = _solve3([c[0] for c in trio], [c[1] for c in trio])
        if sol is None:
            continue
        if all(sum(ci * si for ci, si in zip(c[0], sol)) <= c[1] for c in cons):
            if best is None or sol[2] > best:
                best = sol[2]
    return best is not None and best > 0


def floor_residuals(keys, segments, n):
    """Residuals recomputed with plain Python floats, position by position.

    Each segment predicts relative to an integer anchor: the previous segment's
    anchor plus its floored prediction at the new start.
    """
    import math
    out = []
    starts = [s.start for s in segments] + [n]
    anchor = 0
    for j, seg in enumerate(segments):
        if j:
            prev = segments[j - 1]
            anchor += math.floor(prev.slope * float(seg.start - prev.start) + prev.intercept)
        for i in range(starts[j], starts[j + 1]):
            pred = anchor + math.floor(seg.slope * float(i - seg.start) + seg.intercept)
            out.append(int(keys[i]) - int(keys[0]) - pred)
    return out


def all_cut_patterns(n):
    """Every way to split range(n) into contiguous parts, as boundary lists."""
    for mask in range(1 << max(n - 1, 0)):
        cuts = [0] + [i + 1 for i in range(n - 1) if mask >> i & 1] + [n]
        yield cuts
