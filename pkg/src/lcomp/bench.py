"""Decode-throughput measurement.

Each run decodes every list into a preallocated buffer; the reported time is the
median over ``repeat`` runs after one warm-up run. A checksum of the decoded keys
is kept so results can be compared across modes.
"""
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .codec import decompress_range, decompress_scalar
from .fileformat import serialized_size

MODES = ("scalar", "blocked")
GIB = float(1 << 30)


@dataclass(frozen=True)
class BenchReport:
    dataset: str
    total_size_bytes: int
    bits_per_int: float
    decode_ns_per_int: float
    throughput_gib_s: float
    mode: str
    n: int = 0
    raw_bytes: int = 0
    seconds: float = 0.0
    checksum: int = 0
    repeat: int = 1
    threads: int = 1


def _decoder(mode):
    if mode == "blocked":
        return lambda c, out: decompress_range(c, 0, c.n, out=out)
    if mode == "scalar":
        return lambda c, out: decompress_scalar(c, out=out)
    raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")


def thread_count(default=None):
    """Worker count for parallel runs: ``LC_THREADS`` if set, else the CPU count."""
    env = os.environ.get("LC_THREADS")
    if env:
        return max(1, int(env))
    return default or os.cpu_count() or 1


def checksum(arrays):
    """Wrapping 64-bit sum of every decoded key."""
    total = 0
    for a in arrays:
        total += int(np.add.reduce(a, dtype=np.uint64))
    return total % (1 << 64)


def bench(lists, dataset="keys", mode="blocked", repeat=5, parallel=False, threads=None):
    """Time full decodes of ``lists`` (compressed lists) and summarise as a BenchReport."""
    lists = list(lists)
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    decode = _decoder(mode)
    n = sum(c.n for c in lists)
    raw = sum(c.n * int(c.key_width) // 8 for c in lists)
    size = sum(serialized_size(c.n, c.epsilon, len(c.segments), c.has_residuals) for c in lists)
    buffers = [np.empty(c.n, dtype=np.uint64) for c in lists]
    workers = thread_count(threads) if parallel else 1

    if workers > 1:
        pool = ThreadPoolExecutor(max_workers=workers)

        def run():
            list(pool.map(decode, lists, buffers))
    else:
        pool = None

        def run():
            for c, out in zip(lists, buffers):
                decode(c, out)

    try:
        run()
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            run()
            times.append(time.perf_counter() - t0)
    finally:
        if pool is not None:
            pool.shutdown()
    wall = statistics.median(times)
    return BenchReport(
        dataset=dataset,
        total_size_bytes=size,
        bits_per_int=8 * size / n,
        decode_ns_per_int=wall * 1e9 / n,
        throughput_gib_s=raw / wall / GIB,
        mode=mode,
        n=n,
        raw_bytes=raw,
        seconds=wall,
        checksum=checksum(buffers),
        repeat=repeat,
        threads=workers,
    )
