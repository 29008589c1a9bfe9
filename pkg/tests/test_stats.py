"""Tests for pooled gap statistics and the two-sample K-S test.

The K-S statistic is cross-checked against scipy (exact agreement on d,
loose agreement on the asymptotic p, which scipy computes without the
small-sample correction).
"""

import numpy as np
import pytest
from scipy import stats as scipy_stats

from kpzpf.stats import (
    EmptyPoolError,
    EmptySampleError,
    GapPool,
    delta0,
    jump_k_ratios,
    ks_test,
    _ks_survival,
)


def _pool(*gap_lists):
    positions = [np.concatenate(([0.0], np.cumsum(g))) for g in gap_lists]
    return GapPool.from_positions(positions)


# ---------------------------------------------------------------------------
# gap pool
# ---------------------------------------------------------------------------

def test_pool_from_positions_offsets():
    pool = GapPool.from_positions([[0.0, 1.0, 3.0, 7.0], [0.0, 5.0, 6.0]])
    np.testing.assert_array_equal(pool.gaps, [1.0, 2.0, 4.0, 5.0, 1.0])
    np.testing.assert_array_equal(pool.offsets, [0, 3, 5])
    assert pool.replica_count == 2


def test_pool_rejects_nonpositive_gaps():
    with pytest.raises(ValueError):
        GapPool.from_positions([[0.0, 1.0, 1.0]])


# ---------------------------------------------------------------------------
# delta0
# ---------------------------------------------------------------------------

def test_delta0_constant_gaps():
    np.testing.assert_array_equal(delta0(_pool([2.0, 2.0, 2.0])), [1.0, 1.0, 1.0])


def test_delta0_mean_two():
    np.testing.assert_allclose(delta0(_pool([1.0, 3.0])), [0.5, 1.5])


def test_delta0_output_mean_is_one():
    rng = np.random.default_rng(4)
    pool = _pool(rng.exponential(1.0, 500), rng.exponential(2.0, 300))
    assert delta0(pool).mean() == pytest.approx(1.0, abs=1e-12)


def test_delta0_uses_pooled_mean_not_per_replica():
    out = delta0(_pool([1.0, 1.0], [3.0, 3.0]))
    np.testing.assert_allclose(out, [0.5, 0.5, 1.5, 1.5])


def test_delta0_empty_pool():
    with pytest.raises(EmptyPoolError):
        delta0(GapPool.from_positions([]))


# ---------------------------------------------------------------------------
# jump-k ratios
# ---------------------------------------------------------------------------

def test_jump1_geometric_gaps():
    np.testing.assert_array_equal(jump_k_ratios(_pool([1.0, 2.0, 4.0, 8.0]), 1), [2.0, 2.0, 2.0])


def test_jump3_single_window():
    np.testing.assert_array_equal(jump_k_ratios(_pool([1.0, 2.0, 4.0, 8.0]), 3), [8.0])


def test_jump_constant_gaps_all_ones():
    for k in (1, 2):
        np.testing.assert_array_equal(jump_k_ratios(_pool([5.0, 5.0, 5.0]), k), [1.0, 1.0, 1.0][: 3 - k])


def test_jump_never_mixes_replicas():
    pool = _pool([1.0, 2.0, 4.0], [5.0, 1.0])
    np.testing.assert_array_equal(jump_k_ratios(pool, 1), [2.0, 2.0, 0.2])
    # k=2: only replica 0 has a window
    np.testing.assert_array_equal(jump_k_ratios(pool, 2), [4.0])
    # k=3: no replica long enough -> empty, not an error
    assert jump_k_ratios(pool, 3).size == 0


def test_jump_rejects_k_zero():
    with pytest.raises(ValueError):
        jump_k_ratios(_pool([1.0, 2.0]), 0)


# ---------------------------------------------------------------------------
# K-S test
# ---------------------------------------------------------------------------

def test_ks_identical_samples():
    res = ks_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert res.d == 0.0
    assert res.p == 1.0
    assert (res.n1, res.n2) == (3, 3)


def test_ks_disjoint_supports():
    res = ks_test([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    assert res.d == 1.0
    assert res.p < 0.05


def test_ks_half_overlap():
    # ECDF gaps at pooled points 1, 1.5, 2, 2.5 are 0.5, 0, 0.5, 0
    res = ks_test([1.0, 2.0], [1.5, 2.5])
    assert res.d == 0.5


def test_ks_empty_sample():
    with pytest.raises(EmptySampleError):
        ks_test([], [1.0])


@pytest.mark.parametrize("seed", range(5))
def test_ks_statistic_matches_scipy_exactly(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 1.0, 1 + int(rng.integers(50, 400)))
    b = rng.normal(0.1, 1.2, 1 + int(rng.integers(50, 400)))
    ours = ks_test(a, b)
    ref = scipy_stats.ks_2samp(a, b, method="asymp")
    assert ours.d == pytest.approx(ref.statistic, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_ks_pvalue_close_to_scipy_asymptotic(seed):
    # scipy's asymptotic p omits the small-sample correction; agreement is
    # approximate and tightens with m
    rng = np.random.default_rng(100 + seed)
    a = rng.normal(0.0, 1.0, 800)
    b = rng.normal(0.05, 1.0, 900)
    ours = ks_test(a, b)
    ref = scipy_stats.ks_2samp(a, b, method="asymp")
    assert ours.p == pytest.approx(ref.pvalue, abs=0.02)


def test_ks_scale_invariance_of_delta0():
    rng = np.random.default_rng(12)
    pool = _pool(rng.exponential(1.0, 2000))
    scaled = GapPool(gaps=pool.gaps * 2.0, offsets=pool.offsets)
    res = ks_test(delta0(pool), delta0(scaled))
    assert res.d == 0.0  # power-of-two scaling is float-exact
    res3 = ks_test(delta0(pool), delta0(GapPool(gaps=pool.gaps * 3.0, offsets=pool.offsets)))
    assert res3.p > 0.999


@pytest.mark.parametrize("m_pair", [(1000, 1000), (10000, 10000)])
def test_rejection_threshold_matches_classical_critical_value(m_pair):
    # at the 0.05 level, rejection flips at d = 1.358 * sqrt((n1+n2)/(n1*n2))
    # to within the small-sample correction (<1% for these sizes)
    n1, n2 = m_pair
    m = n1 * n2 / (n1 + n2)
    d_crit = 1.358 * np.sqrt((n1 + n2) / (n1 * n2))
    for d, expect_reject in ((1.01 * d_crit, True), (0.99 * d_crit, False)):
        lam = (np.sqrt(m) + 0.12 + 0.11 / np.sqrt(m)) * d
        p = _ks_survival(lam)
        assert (p < 0.05) is expect_reject


def test_ks_survival_edge_cases():
    assert _ks_survival(0.0) == 1.0
    assert _ks_survival(1e-4) == pytest.approx(1.0, abs=1e-6)
    assert _ks_survival(10.0) == pytest.approx(0.0, abs=1e-12)
    # Q(1.358) defines the 5% critical value
    assert _ks_survival(1.358) == pytest.approx(0.05, abs=5e-4)
