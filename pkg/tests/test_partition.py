import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import key_lists, make_keys
from lcomp.codec import compress
from lcomp.errors import EmptyInput, IndexOutOfRange
from lcomp.fileformat import HEADER_BITS, PLAN_HEADER_BITS, serialize
from lcomp.partition import (
    EDGE_EPSILONS,
    best_edge,
    compress_plan,
    decompress_plan,
    edge_cost,
    greedy_partition,
    optimal_partition,
    plan_bytes,
    single_partition,
)
from oracles import all_cut_patterns


def serialized_edge(keys, i, j):
    """Cheapest serialized size of keys[i:j] over the edge epsilons, by compressing each."""
    return min(8 * len(serialize(compress(keys[i:j], e))) for e in EDGE_EPSILONS)


def brute_force(keys):
    n = len(keys)
    cost = {(i, j): serialized_edge(keys, i, j) for i in range(n) for j in range(i + 1, n + 1)}
    best = min(sum(cost[c[k], c[k + 1]] for k in range(len(c) - 1)) for c in all_cut_patterns(n))
    return best + PLAN_HEADER_BITS


def two_regimes(rng, n):
    """Nearly linear keys followed by keys with huge random gaps."""
    half = n // 2
    steady = np.cumsum(20 + rng.integers(-2, 3, half))
    huge = steady[-1] + np.cumsum(rng.integers(1, 100_000, n - half))
    return np.concatenate([steady, huge]).astype(np.uint64), half


def test_single_key_edge():
    # one segment and one residual word, padded to 8 bytes
    assert edge_cost([5, 9, 12], 1, 2) == HEADER_BITS + 96 + 64


def test_linear_run_is_one_segment_at_eps_one():
    keys = np.arange(0, 3000, 3, dtype=np.uint64)
    bits, eps = best_edge(keys, 100, 900)
    assert (bits, eps) == (HEADER_BITS + 96 + 64 * -(-800 * 2 // 64), 1)


@pytest.mark.parametrize("seed", range(6))
def test_edge_cost_matches_serialized_size(seed):
    rng = np.random.default_rng(seed)
    keys = make_keys(rng, 600, ["uniform", "clustered", "heavy"][seed % 3])
    for _ in range(5):
        i = int(rng.integers(0, 599))
        j = int(rng.integers(i + 1, 601))
        assert edge_cost(keys, i, j) == serialized_edge(keys, i, j)


def test_edge_bounds():
    with pytest.raises(IndexOutOfRange):
        edge_cost([1, 2, 3], 2, 2)
    with pytest.raises(IndexOutOfRange):
        edge_cost([1, 2, 3], 0, 4)


def test_empty_input():
    with pytest.raises(EmptyInput):
        optimal_partition([])
    with pytest.raises(EmptyInput):
        greedy_partition([])


def test_linear_keys_stay_whole():
    keys = np.arange(7, 7 + 5 * 400, 5, dtype=np.uint64)
    for plan in (optimal_partition(keys), greedy_partition(keys)):
        assert plan.cuts == (0, 400)
        assert plan.total_bits == single_partition(keys).total_bits


@given(key_lists(max_size=9, max_gap=3000, max_base=10 ** 6))
def test_optimal_matches_enumeration(keys):
    assert optimal_partition(keys).total_bits == brute_force(keys)


@pytest.mark.parametrize("seed", range(4))
def test_optimal_matches_enumeration_twelve(seed):
    rng = np.random.default_rng(seed)
    keys = np.cumsum(rng.integers(1, [3, 50, 5000, 200][seed], 12)).astype(np.uint64)
    assert optimal_partition(keys).total_bits == brute_force(keys)


def test_two_regimes_cut_near_boundary():
    keys, boundary = two_regimes(np.random.default_rng(8), 1200)
    plan = optimal_partition(keys)
    single = single_partition(keys)
    assert plan.total_bits < single.total_bits
    assert min(abs(c - boundary) for c in plan.cuts[1:-1]) <= 16


def test_greedy_finds_regime_cut_within_one_granule():
    keys, boundary = two_regimes(np.random.default_rng(8), 1200)
    g = 32
    exact = optimal_partition(keys)
    approx = greedy_partition(keys, g)
    cut = min(exact.cuts[1:-1], key=lambda c: abs(c - boundary))
    assert min(abs(c - cut) for c in approx.cuts[1:-1]) <= g
    assert exact.total_bits <= approx.total_bits < single_partition(keys).total_bits


@given(key_lists(max_size=12, max_gap=5000))
def test_ordering_and_ratio(keys):
    exact = optimal_partition(keys).total_bits
    approx = greedy_partition(keys).total_bits
    assert exact <= approx <= single_partition(keys).total_bits
    assert approx <= 1.3 * exact


@pytest.mark.parametrize("granularity", [1, 7, 64, None])
def test_plans_are_lossless_and_sized_exactly(granularity):
    keys = make_keys(np.random.default_rng(4), 700, "clustered")
    for plan in (greedy_partition(keys, granularity), optimal_partition(keys)):
        assert plan.cuts[0] == 0 and plan.cuts[-1] == len(keys)
        assert all(a < b for a, b in zip(plan.cuts, plan.cuts[1:]))
        assert len(plan.per_part_epsilon) == len(plan.cuts) - 1
        parts = compress_plan(keys, plan)
        assert np.array_equal(decompress_plan(parts).keys, keys)
        assert 8 * len(plan_bytes(keys, plan)) == plan.total_bits


def test_greedy_rejects_bad_granularity():
    with pytest.raises(ValueError):
        greedy_partition([1, 2, 3], 0)
