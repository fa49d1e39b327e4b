"""Split one key list into independently compressed partitions.

Partitions form a DAG over positions ``0..N``: edge ``i -> j`` is the list
``keys[i:j]`` compressed on its own, weighted by its serialized size at the best
ε in :data:`EDGE_EPSILONS`. The cheapest plan is a shortest path from 0 to N.

Segment counts come from greedy jumps: the greedy fit starting at ``i`` breaks
first at ``next(i)`` and then behaves exactly like the fit starting there, so the
count for ``keys[i:j]`` is the number of jumps from ``i`` needed to reach ``j``.
"""
from dataclasses import dataclass

import numpy as np

from .codec import compress, decompress
from .core import SEGMENT_BITS, SortedKeyList, residual_bit_width
from .errors import EmptyInput, IndexOutOfRange
from .fileformat import HEADER_BITS, PLAN_HEADER_BITS, residual_section_bytes, serialize_plan
from .pla import greedy_extent, relative_keys

EDGE_EPSILONS = tuple(2 ** k for k in range(9))


@dataclass(frozen=True)
class PartitionPlan:
    cuts: tuple
    per_part_epsilon: tuple
    total_bits: int

    @property
    def parts(self):
        return list(zip(self.cuts[:-1], self.cuts[1:], self.per_part_epsilon))

    def __len__(self):
        return len(self.per_part_epsilon)


def edge_bits(length, epsilon, segments):
    """Serialized bits of one list of ``length`` keys with ``segments`` segments."""
    raw, pad = residual_section_bytes(length, epsilon)
    return HEADER_BITS + SEGMENT_BITS * segments + 8 * (raw + pad)


class _Jumps:
    """Greedy break points from arbitrary starts, computed on demand."""

    def __init__(self, y, epsilon, scale):
        self.y = y
        self.epsilon = epsilon
        self.scale = scale
        self.n = len(y)
        self.nxt = {}

    def next(self, i):
        j = self.nxt.get(i)
        if j is None:
            j = greedy_extent(self.y, i, self.epsilon, self.scale)[0]
            self.nxt[i] = j
        return j

    def chain(self, i, stop):
        """Break points from ``i`` up to the first one at or beyond ``stop``."""
        out = [i]
        while i < stop:
            i = self.next(i)
            out.append(i)
        return out

    def count(self, i, j):
        L = 0
        while i < j:
            i = self.next(i)
            L += 1
        return L


def _prepare(keys):
    keys = SortedKeyList.of(keys)
    n = len(keys)
    if n == 0:
        raise EmptyInput("cannot partition an empty key list")
    y = relative_keys(keys).tolist()
    jumps = {eps: _Jumps(y, eps, n + 1) for eps in EDGE_EPSILONS}
    return keys, n, jumps


def _residual_bits(lengths, epsilon):
    b = residual_bit_width(epsilon)
    return 64 * ((lengths * b + 63) // 64)


def _best(jumps, i, j):
    best = None
    for eps, jp in jumps.items():
        bits = edge_bits(j - i, eps, jp.count(i, j))
        if best is None or bits < best[0]:
            best = (bits, eps)
    return best


def _best_from(jumps, i, targets):
    """``_best`` for many edges out of ``i``, counting along a single chain per ε."""
    targets = np.asarray(targets, dtype=np.int64)
    best_bits = np.full(len(targets), np.iinfo(np.int64).max, dtype=np.int64)
    best_eps = np.zeros(len(targets), dtype=np.int64)
    for eps, jp in jumps.items():
        chain = np.array(jp.chain(i, int(targets[-1])), dtype=np.int64)
        counts = np.searchsorted(chain, targets, side="left")
        bits = HEADER_BITS + SEGMENT_BITS * counts + _residual_bits(targets - i, eps)
        better = bits < best_bits
        best_bits[better] = bits[better]
        best_eps[better] = eps
    return list(zip(best_bits.tolist(), best_eps.tolist()))


def best_edge(keys, i, j):
    """``(bits, epsilon)`` of the cheapest encoding of ``keys[i:j]`` as one partition."""
    keys = SortedKeyList.of(keys)
    if not 0 <= i < j <= len(keys):
        raise IndexOutOfRange(f"edge [{i}, {j}) outside [0, {len(keys)}]")
    y = relative_keys(SortedKeyList(keys.keys[i:j], keys.width)).tolist()
    jumps = {eps: _Jumps(y, eps, len(y) + 1) for eps in EDGE_EPSILONS}
    return _best(jumps, 0, j - i)


def edge_cost(keys, i, j):
    return best_edge(keys, i, j)[0]


def _plan(n, parent, choice, dist):
    cuts = [n]
    eps = []
    while cuts[-1] > 0:
        j = cuts[-1]
        eps.append(int(choice[j]))
        cuts.append(int(parent[j]))
    cuts.reverse()
    eps.reverse()
    return PartitionPlan(tuple(cuts), tuple(eps), int(dist[n]) + PLAN_HEADER_BITS)


def single_partition(keys):
    keys, n, jumps = _prepare(keys)
    bits, eps = _best(jumps, 0, n)
    return PartitionPlan((0, n), (eps,), bits + PLAN_HEADER_BITS)


def optimal_partition(keys):
    """Minimum-bit plan over every contiguous partitioning.

    Relaxes all Θ(N²) edges in index order (the graph is a DAG), so it is meant
    for lists up to roughly 10⁴ keys.
    """
    keys, n, jumps = _prepare(keys)
    inf = np.iinfo(np.int64).max
    dist = np.full(n + 1, inf, dtype=np.int64)
    dist[0] = 0
    parent = np.zeros(n + 1, dtype=np.int64)
    choice = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        lengths = np.arange(1, n - i + 1, dtype=np.int64)
        for eps, jp in jumps.items():
            chain = np.array(jp.chain(i, n), dtype=np.int64)
            counts = np.repeat(np.arange(1, len(chain), dtype=np.int64), np.diff(chain))
            cost = dist[i] + HEADER_BITS + SEGMENT_BITS * counts + _residual_bits(lengths, eps)
            target = dist[i + 1:]
            better = cost < target
            if better.any():
                target[better] = cost[better]
                parent[i + 1:][better] = i
                choice[i + 1:][better] = eps
    return _plan(n, parent, choice, dist)


def default_granularity(n):
    return max(1, n // 512)


def greedy_partition(keys, granularity=None):
    """Approximate plan over a sparse edge set.

    Nodes sit every ``granularity`` positions. Each node gets edges of length
    ``granularity * 2**k``, the last one clamped to N, and node 0 also reaches
    every node directly, so the first cut can land on any grid point and the
    plan never costs more than a single partition.
    """
    keys, n, jumps = _prepare(keys)
    g = default_granularity(n) if granularity is None else int(granularity)
    if g < 1:
        raise ValueError("granularity must be >= 1")
    nodes = list(range(0, n, g)) + [n]
    dist = {0: 0}
    parent = {}
    choice = {}
    for i in nodes[:-1]:
        if i not in dist:
            continue
        if i == 0:
            targets = nodes[1:]
        else:
            targets = []
            length = g
            while True:
                j = min(i + length, n)
                targets.append(j)
                if j == n:
                    break
                length *= 2
        for j, (bits, eps) in zip(targets, _best_from(jumps, i, targets)):
            cand = dist[i] + bits
            if cand < dist.get(j, float("inf")):
                dist[j] = cand
                parent[j] = i
                choice[j] = eps
    return _plan(n, parent, choice, dist)


def compress_plan(keys, plan):
    keys = SortedKeyList.of(keys)
    return [compress(SortedKeyList(keys.keys[i:j], keys.width), eps) for i, j, eps in plan.parts]


def decompress_plan(parts):
    keys = np.concatenate([decompress(c).keys for c in parts])
    return SortedKeyList(keys, max(int(c.key_width) for c in parts))


def plan_bytes(keys, plan):
    return serialize_plan(compress_plan(keys, plan))
