"""Error-bound selection.

With i.i.d. key gaps of variance σ², a segment covers about ε²/(σ² C) keys, so
the total cost is roughly ``L (K + 2F) + N log2 ε`` with ``L = N σ² C / ε²``.
Minimising over ε gives ``ε* = sqrt(2 ln2 σ² C (K + 2F))``.
"""
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .codec import compress, space_report
from .core import SortedKeyList
from .errors import DegenerateSample, MissingCalibration, TooShort
from .pla import count_segments

DEFAULT_C = 1.0
SPACE_CONSTANT = 1.721
POWERS_OF_TWO = tuple(2 ** k for k in range(13))


@dataclass(frozen=True)
class TuningStats:
    n: int
    gap_variance: float
    c_const: float = None
    key_bits: int = 32
    float_bits: int = 32

    def with_c(self, c):
        return replace(self, c_const=float(c))


@dataclass(frozen=True)
class SweepPoint:
    epsilon: int
    segments: int
    total_bits: int
    bits_per_int: float


def gap_stats(keys):
    """Population variance of consecutive gaps; ``c_const`` left unset."""
    keys = SortedKeyList.of(keys)
    if len(keys) < 2:
        raise TooShort("gap variance needs at least two keys")
    gaps = np.diff(keys.keys).astype(np.float64)
    return TuningStats(len(keys), float(gaps.var()), None, int(keys.width))


def epsilon_opt(stats):
    if stats.c_const is None:
        raise MissingCalibration("set c_const (calibrate_c or a configured value) first")
    x = math.sqrt(2 * math.log(2) * stats.gap_variance * stats.c_const * (stats.key_bits + 2 * stats.float_bits))
    return max(1, math.floor(x + 0.5))


def space_model(stats, epsilon):
    """Modelled total bits ``N (1.721 + ceil(log2 ε))``; ignores per-list overhead."""
    if epsilon < 1:
        raise ValueError("the space model needs epsilon >= 1")
    return stats.n * (SPACE_CONSTANT + math.ceil(math.log2(epsilon)))


def calibrate_c(sample, epsilons=POWERS_OF_TWO):
    """Fit C to measured segment counts.

    Uses sweep points with ``2 <= L <= N/4``, where the ``L = N σ² C / ε²`` model
    is meaningful, and solves for C by least squares on ``log L``.
    """
    sample = SortedKeyList.of(sample)
    stats = gap_stats(sample)
    counts = {eps: count_segments(sample, eps) for eps in epsilons}
    if len(set(counts.values())) <= 1 or stats.gap_variance == 0:
        raise DegenerateSample(f"segment count does not vary across the sweep: {counts}")
    n = stats.n
    usable = [(eps, L) for eps, L in counts.items() if eps >= 1 and 2 <= L <= n / 4]
    if not usable:
        raise DegenerateSample(f"no sweep point with 2 <= L <= N/4: {counts}")
    logs = [math.log(L) - math.log(n * stats.gap_variance / eps ** 2) for eps, L in usable]
    return math.exp(sum(logs) / len(logs))


def sweep(keys, epsilons=POWERS_OF_TWO):
    """Compress at every candidate ε and measure the result."""
    keys = SortedKeyList.of(keys)
    out = []
    for eps in epsilons:
        rep = space_report(compress(keys, eps))
        out.append(SweepPoint(eps, rep.segment_bits // 96, rep.total_bits, rep.bits_per_int))
    return out


def sweep_argmin(points):
    return min(points, key=lambda p: (p.total_bits, p.epsilon))


def tune(keys, c_const=None, sample=None):
    """Closed-form ε for ``keys``; calibrates C on ``sample`` (default: the keys themselves).

    Falls back to C = 1.0 with a warning when calibration is impossible.
    """
    keys = SortedKeyList.of(keys)
    stats = gap_stats(keys)
    if c_const is None:
        try:
            c_const = calibrate_c(keys if sample is None else sample)
        except DegenerateSample as exc:
            warnings.warn(f"C uncalibrated ({exc}); using C = {DEFAULT_C}", stacklevel=2)
            c_const = DEFAULT_C
    stats = stats.with_c(c_const)
    return epsilon_opt(stats), stats
