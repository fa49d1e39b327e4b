import bisect

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GAP_KINDS, TOY_KEYS, key_lists, make_keys
from lcomp.codec import compress, decompress
from lcomp.errors import InvalidQuantile, MissingResiduals
from lcomp.query import (
    QueryStats,
    intersect,
    next_geq,
    quantile_approx,
    quantile_exact,
    segment_key_range,
    union,
)


def sorted_index(keys, k, q):
    return min(len(keys) * k // q, len(keys) - 1)


def test_toy_quantile(toy):
    c = compress(toy, 4)
    assert quantile_exact(c, 1, 21) == 3
    assert quantile_exact(c, 21, 21) == 77


def test_toy_quantile_approx_within_epsilon(toy):
    c = compress(toy, 4).segments_only()
    for q in range(1, 30):
        for k in range(1, q + 1):
            assert abs(quantile_approx(c, k, q) - TOY_KEYS[sorted_index(TOY_KEYS, k, q)]) <= 4


def test_toy_next_geq(toy):
    c = compress(toy, 4)
    assert next_geq(c, 77) == (20, 77)
    assert next_geq(c, 0) == (0, 1)
    assert next_geq(c, 78) is None
    assert next_geq(c, 21) == (6, 32)


@pytest.mark.parametrize("k,q", [(0, 3), (4, 3), (1, 0), (-1, 5)])
def test_invalid_quantiles(toy, k, q):
    c = compress(toy, 4)
    with pytest.raises(InvalidQuantile):
        quantile_exact(c, k, q)
    with pytest.raises(InvalidQuantile):
        quantile_approx(c, k, q)


def test_quantile_approx_exact_on_linear_keys():
    keys = 7 * np.arange(1, 1000, dtype=np.uint64)
    c = compress(keys, 0).segments_only()
    for q in (1, 3, 10, 999):
        for k in range(1, q + 1):
            assert quantile_approx(c, k, q) == int(keys[sorted_index(keys, k, q)])


@pytest.mark.parametrize("kind", GAP_KINDS)
def test_quantiles_against_sorted_array(kind):
    rng = np.random.default_rng(GAP_KINDS.index(kind))
    keys = make_keys(rng, int(rng.integers(1, 3000)), kind)
    eps = 13
    c = compress(keys, eps)
    approx = c.segments_only()
    for q in range(1, 51):
        for k in range(1, q + 1):
            want = int(keys[sorted_index(keys, k, q)])
            assert quantile_exact(c, k, q) == want
            assert abs(quantile_approx(approx, k, q) - want) <= eps


def test_quantile_approx_clamps_to_universe():
    c = compress([0, 1, 2, 1000, 1001], 600).segments_only()
    for q in range(1, 6):
        for k in range(1, q + 1):
            assert quantile_approx(c, k, q) >= 0


@given(key_lists(max_size=400, max_gap=500), st.integers(0, 50), st.data())
def test_next_geq_matches_bisect(keys, eps, data):
    c = compress(keys, eps)
    klist = keys.tolist()
    for _ in range(25):
        x = data.draw(st.integers(max(klist[0] - 10, 0), klist[-1] + 10))
        i = bisect.bisect_left(klist, x)
        assert next_geq(c, x) == (None if i == len(klist) else (i, klist[i]))


def test_next_geq_flat_segments():
    # dense run then a huge jump: slopes near zero inside long segments
    keys = np.concatenate([np.arange(1, 400), [10 ** 9]]).astype(np.uint64)
    c = compress(keys, 200)
    for x in [0, 1, 2, 200, 399, 400, 10 ** 8, 10 ** 9]:
        i = bisect.bisect_left(keys.tolist(), x)
        assert next_geq(c, x) == (i, int(keys[i]))


@given(key_lists(max_size=300, max_gap=300), st.integers(0, 40))
def test_segment_key_range_soundness(keys, eps):
    c = compress(keys, eps)
    for j in range(len(c.segments)):
        r = segment_key_range(c, j)
        block = keys[r.lo_idx:r.hi_idx + 1]
        assert r.lo_key <= int(block.min()) and int(block.max()) <= r.hi_key


def pair(rng, kind_a, kind_b):
    a = make_keys(rng, int(rng.integers(1, 2000)), kind_a, base=int(rng.integers(0, 5000)))
    b = make_keys(rng, int(rng.integers(1, 2000)), kind_b, base=int(rng.integers(0, 5000)))
    return a, b


@pytest.mark.parametrize("seed", range(12))
def test_intersect_union_against_sets(seed):
    rng = np.random.default_rng(seed)
    kinds = rng.choice(GAP_KINDS, 2)
    a, b = pair(rng, *kinds)
    ca, cb = compress(a, int(rng.integers(0, 40))), compress(b, int(rng.integers(0, 40)))
    assert np.array_equal(intersect(ca, cb).keys, np.intersect1d(a, b))
    assert np.array_equal(intersect(cb, ca).keys, np.intersect1d(a, b))
    assert np.array_equal(union(ca, cb).keys, np.union1d(a, b))
    assert np.array_equal(union(cb, ca).keys, np.union1d(a, b))


@given(key_lists(max_size=200, max_gap=20), key_lists(max_size=200, max_gap=20, max_base=300),
       st.integers(0, 10), st.integers(0, 10))
def test_intersect_property(a, b, ea, eb):
    ca, cb = compress(a, ea), compress(b, eb)
    assert np.array_equal(intersect(ca, cb).keys, np.intersect1d(a, b))
    assert np.array_equal(union(ca, cb).keys, np.union1d(a, b))


def test_self_operations(rng):
    keys = make_keys(rng, 5000, "heavy")
    c = compress(keys, 31)
    assert intersect(c, c) == decompress(c)
    assert union(c, c) == decompress(c)


def test_disjoint_ranges_read_no_interior_residuals():
    a = compress(np.arange(0, 30_000, 3, dtype=np.uint64), 4)
    b = compress(np.arange(10 ** 6, 10 ** 6 + 70_000, 7, dtype=np.uint64), 4)
    stats = QueryStats()
    assert len(intersect(a, b, stats)) == 0
    assert stats.interior_reads == 0
    assert stats.segments_decoded == 0
    # only the first and last key of each list were touched
    assert stats.residual_reads == 4
    u = union(a, b)
    assert np.array_equal(u.keys, np.concatenate([decompress(a).keys, decompress(b).keys]))


def test_intersection_prunes_segments():
    rng = np.random.default_rng(3)
    a = make_keys(rng, 20_000, "clustered")
    b = a[5000:5100].copy()
    ca, cb = compress(a, 2), compress(b, 2)
    stats = QueryStats()
    assert np.array_equal(intersect(ca, cb, stats).keys, b)
    assert stats.residual_reads < len(a) // 10


def test_queries_need_residuals(toy):
    c = compress(toy, 4).segments_only()
    with pytest.raises(MissingResiduals):
        next_geq(c, 5)
    with pytest.raises(MissingResiduals):
        intersect(c, c)
    with pytest.raises(MissingResiduals):
        quantile_exact(c, 1, 2)
