"""Kernel contract tests: both backends against brute-force oracles, and
compiled-vs-pure parity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lstregress._kernels import _pure

try:
    from lstregress._kernels import _ext
except ImportError:
    _ext = None

BACKENDS = [_pure] if _ext is None else [_pure, _ext]
ids = ["pure"] if _ext is None else ["pure", "compiled"]


def oracle_median(v):
    s = sorted(v)
    n = len(s)
    return 0.5 * (s[(n - 1) // 2] + s[n // 2])


finite_vecs = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=60
).map(np.asarray)


@pytest.mark.parametrize("k", BACKENDS, ids=ids)
class TestBackend:
    def test_median_small(self, k):
        assert k.median(np.array([1.0, 2, 3])) == 2
        assert k.median(np.array([1.0, 2, 3, 4])) == 2.5
        assert k.median(np.array([5.0, 5, 5])) == 5
        assert k.median(np.array([7.0])) == 7

    def test_median_empty(self, k):
        with pytest.raises(ValueError):
            k.median(np.array([]))

    def test_mad_small(self, k):
        assert k.mad(np.array([1.0, 2, 3])) == 1
        assert k.mad(np.array([5.0, 5, 5])) == 0
        assert k.mad(np.array([0.0, 0, 0, 10])) == 0

    @given(v=finite_vecs)
    @settings(max_examples=150, deadline=None)
    def test_median_matches_oracle(self, k, v):
        assert k.median(v) == oracle_median(v)

    @given(v=finite_vecs)
    @settings(max_examples=150, deadline=None)
    def test_mad_matches_oracle(self, k, v):
        m = oracle_median(v)
        assert k.mad(v) == oracle_median(np.abs(v - m))

    @given(v=finite_vecs, alpha=st.floats(min_value=1.0, max_value=10.0))
    @settings(max_examples=150, deadline=None)
    def test_trim_stats_contract(self, k, v, alpha):
        m, sigma, degen, depths, mask, q, kc = k.trim_stats(v, alpha)
        assert m == oracle_median(v)
        raw = oracle_median(np.abs(v - m))
        assert degen == (raw == 0.0)
        assert sigma == (1.0 if degen else raw)
        assert sigma > 0
        np.testing.assert_array_equal(depths, np.abs(v - m) / sigma)
        np.testing.assert_array_equal(mask, depths <= alpha)
        assert kc == int(mask.sum())
        assert q == pytest.approx(float(np.sum(v[mask] ** 2)), rel=1e-12, abs=1e-300)
        # majority property: at least floor((n+1)/2) residuals are kept
        assert kc >= (len(v) + 1) // 2

    @given(v=finite_vecs)
    @settings(max_examples=100, deadline=None)
    def test_trim_stats_deterministic(self, k, v):
        a = k.trim_stats(v, 1.0)
        b = k.trim_stats(v, 1.0)
        assert a[0] == b[0] and a[1] == b[1] and a[5] == b[5]
        np.testing.assert_array_equal(a[3], b[3])

    @given(v=finite_vecs,h_frac=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=150, deadline=None)
    def test_h_smallest_matches_oracle(self, k, v, h_frac):
        n = len(v)
        h = max(1, min(n, int(round(h_frac * n))))
        got = k.h_smallest(v, h)
        want = sorted(i for _, i in sorted(zip(v, range(n)))[:h])
        assert list(got) == want

    def test_h_smallest_range(self, k):
        with pytest.raises(ValueError):
            k.h_smallest(np.array([1.0, 2.0]), 0)
        with pytest.raises(ValueError):
            k.h_smallest(np.array([1.0, 2.0]), 3)


@pytest.mark.skipif(_ext is None, reason="compiled backend not built")
@given(v=finite_vecs, alpha=st.floats(min_value=1.0, max_value=5.0))
@settings(max_examples=200, deadline=None)
def test_backend_parity(v, alpha):
    mp, sp, dp, depp, maskp, qp, kcp = _pure.trim_stats(v, alpha)
    mc, sc, dc, depc, maskc, qc, kcc = _ext.trim_stats(v, alpha)
    assert mp == mc and sp == sc and dp == dc and kcp == kcc
    np.testing.assert_array_equal(depp, depc)
    np.testing.assert_array_equal(maskp, maskc)
    assert qp == pytest.approx(qc, rel=1e-12, abs=1e-300)
    h = max(1, len(v) // 2)
    np.testing.assert_array_equal(_pure.h_smallest(v, h), _ext.h_smallest(v, h))
