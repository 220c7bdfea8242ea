import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lstregress as L
from lstregress import ContaminationPoint, Dataset
from lstregress.diagnostics import std_normal_cdf, std_normal_quantile

from conftest import make_clean


class TestRbp:
    @pytest.mark.parametrize(
        "n,p,want",
        [(7, 1, Fraction(4, 7)), (10, 3, Fraction(4, 10)), (23, 5, Fraction(8, 23))],
    )
    def test_values(self, n, p, want):
        assert L.rbp(n, p) == want

    def test_requires_n_over_2p_plus_1(self):
        with pytest.raises(ValueError):
            L.rbp(7, 3)
        with pytest.raises(ValueError):
            L.rbp(10, 0)

    @given(n=st.integers(4, 500), p=st.integers(1, 30))
    @settings(max_examples=200, deadline=None)
    def test_bounds_and_monotonicity(self, n, p):
        if n <= 2 * p + 1:
            return
        v = L.rbp(n, p)
        assert Fraction(0) < v <= Fraction(1, 2) + Fraction(1, n)
        if p > 1 and n > 2 * (p + 1) + 1:
            assert L.rbp(n, p + 1) <= v


class TestInfluenceFunction:
    def test_outside_band_is_bitwise_zero(self):
        z0 = ContaminationPoint(s0=np.array([1.0, 2.0]), t0=100.0)
        out = L.influence_function(z0, [0.0, 0.0, 0.0], m=0.0, sigma=1.0, alpha=2.0,
                                   M=np.eye(3))
        assert out.shape == (3,)
        assert np.all(out == 0.0)

    def test_boundary_included(self):
        # residual exactly at m + alpha*sigma is inside the closed band
        z0 = ContaminationPoint(s0=np.array([0.0]), t0=2.0)
        out = L.influence_function(z0, [0.0, 0.0], m=0.0, sigma=1.0, alpha=2.0,
                                   M=np.eye(2))
        np.testing.assert_array_equal(out, [2.0, 0.0])

    def test_zero_residual(self):
        z0 = ContaminationPoint(s0=np.array([3.0]), t0=0.0)
        out = L.influence_function(z0, [0.0, 0.0], m=0.0, sigma=1.0, alpha=1.0,
                                   M=np.eye(2))
        assert np.all(out == 0.0)

    def test_identity_algebra(self):
        z0 = ContaminationPoint(s0=np.zeros(2), t0=0.5)
        out = L.influence_function(z0, np.zeros(3), m=0.0, sigma=1.0, alpha=1.0,
                                   M=np.eye(3))
        np.testing.assert_allclose(out, [0.5, 0.0, 0.0], atol=1e-15)

    def test_linearity_in_r0(self):
        rng = np.random.default_rng(8)
        M = np.eye(3) + 0.1 * rng.standard_normal((3, 3))
        M = M @ M.T
        s0 = rng.standard_normal(2)
        a = L.influence_function(ContaminationPoint(s0, 0.3), np.zeros(3), 0.0, 1.0, 1.0, M)
        b = L.influence_function(ContaminationPoint(s0, 0.6), np.zeros(3), 0.0, 1.0, 1.0, M)
        np.testing.assert_allclose(b, 2 * a, rtol=1e-12)

    def test_singular_m(self):
        z0 = ContaminationPoint(s0=np.array([1.0]), t0=0.1)
        with pytest.raises(L.SingularMatrixError):
            L.influence_function(z0, [0.0, 0.0], 0.0, 1.0, 1.0, np.zeros((2, 2)))


class TestEmpiricalIf:
    def test_huge_response_is_zero(self):
        data = make_clean(30, 3, 1)
        fit = L.lst_fit_aa1(data, L.Aa1Config(seed=0))
        z0 = ContaminationPoint(s0=np.zeros(2), t0=1e9)
        assert np.all(L.empirical_if(data, 1.0, z0, fit) == 0.0)

    def test_point_on_fit_with_zero_in_band(self):
        data = make_clean(30, 3, 2)
        fit = L.lst_fit_aa1(data, L.Aa1Config(seed=0))
        st_ = L.trim_state(data, fit.beta, 1.0)
        if not (st_.m - st_.sigma <= 0.0 <= st_.m + st_.sigma):
            pytest.skip("0 not in band for this draw")
        s0 = np.array([0.3, -0.4])
        t0 = float(np.concatenate([[1.0], s0]) @ fit.beta)
        out = L.empirical_if(data, 1.0, ContaminationPoint(s0, t0), fit)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_matches_explicit_formula(self):
        data = make_clean(30, 3, 3)
        fit = L.lst_fit_aa1(data, L.Aa1Config(seed=1))
        st_ = L.trim_state(data, fit.beta, 1.0)
        Wk = data.design[st_.kept]
        M = Wk.T @ Wk / data.n
        z0 = ContaminationPoint(s0=data.carriers[4], t0=data.response[4])
        want = L.influence_function(z0, fit.beta, st_.m, st_.sigma, 1.0, M)
        got = L.empirical_if(data, 1.0, z0, fit)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


class TestTransforms:
    def test_shift_identity(self, seven_points):
        rng = np.random.default_rng(0)
        b = rng.standard_normal(2)
        shifted = L.shift_response(seven_points, b)
        r0 = L.compute_residuals(seven_points, [0.3, 0.7])
        r1 = L.compute_residuals(shifted, np.array([0.3, 0.7]) + b)
        np.testing.assert_allclose(r1, r0, atol=1e-12)

    def test_scale_one_identity(self, seven_points):
        s = L.scale_response(seven_points, 1.0)
        np.testing.assert_array_equal(s.response, seven_points.response)

    def test_affine_identity(self, seven_points):
        t = L.affine_carriers(seven_points, np.eye(2))
        np.testing.assert_array_equal(t.carriers, seven_points.carriers)

    def test_affine_requires_intercept_structure(self, seven_points):
        A = np.array([[1.0, 0.5], [0.1, 1.0]])  # first column not e1
        with pytest.raises(ValueError):
            L.affine_carriers(seven_points, A)

    def test_affine_singular(self, seven_points):
        A = np.array([[1.0, 0.5], [0.0, 0.0]])
        with pytest.raises(L.SingularMatrixError):
            L.affine_carriers(seven_points, A)

    def test_originals_untouched(self, seven_points):
        before = seven_points.response.copy()
        L.shift_response(seven_points, [1.0, 1.0])
        L.scale_response(seven_points, 3.0)
        np.testing.assert_array_equal(seven_points.response, before)


@given(seed=st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_objective_equivariance_triple(seed):
    rng = np.random.default_rng(seed)
    n, p = 15, 3
    data = Dataset(rng.standard_normal((n, p - 1)), rng.standard_normal(n))
    beta = rng.standard_normal(p)
    alpha = 1.0 + float(rng.uniform(0, 2))
    q0 = L.objective_q(data, beta, alpha).q

    b = rng.standard_normal(p)
    qs = L.objective_q(L.shift_response(data, b), beta + b, alpha).q
    assert qs == pytest.approx(q0, rel=1e-9, abs=1e-12)

    s = float(rng.uniform(0.1, 5.0)) * (1 if rng.uniform() < 0.5 else -1)
    qsc = L.objective_q(L.scale_response(data, s), s * beta, alpha).q
    assert qsc == pytest.approx(s * s * q0, rel=1e-9, abs=1e-12)

    A = np.eye(p)
    A[0, 1:] = rng.standard_normal(p - 1)
    A[1:, 1:] += 0.3 * rng.standard_normal((p - 1, p - 1))
    if abs(np.linalg.det(A)) < 1e-6:
        return
    qa = L.objective_q(L.affine_carriers(data, A), np.linalg.solve(A, beta), alpha).q
    assert qa == pytest.approx(q0, rel=1e-9, abs=1e-12)


class TestBreakdownProbe:
    def test_no_contamination_zero_curve(self):
        data = make_clean(30, 2, 5)
        curve = L.breakdown_probe(data, "ls", 0, [1e2, 1e4])
        assert all(d == 0.0 for _, d in curve)

    def test_ls_vertical_outlier_explodes(self):
        data = make_clean(50, 3, 6)
        curve = L.breakdown_probe(data, "ls", 1, [1e2, 1e4, 1e6],
                                  leverage_carriers=False)
        devs = [d for _, d in curve]
        assert devs[0] < devs[1] < devs[2]
        assert devs[2] > 1e3

    def test_trimmed_fit_stays_bounded(self):
        data = make_clean(50, 3, 6)
        curve = L.breakdown_probe(data, "lst-aa1", 5, [1e2, 1e4, 1e6],
                                  config=L.Aa1Config(alpha=1.0, seed=3))
        devs = [d for _, d in curve]
        assert max(devs) <= 3.0 * min(devs)

    def test_validation(self):
        data = make_clean(20, 2, 0)
        with pytest.raises(ValueError):
            L.breakdown_probe(data, "ls", 25, [1e2])
        with pytest.raises(ValueError):
            L.breakdown_probe(data, "ls", 1, [1e4, 1e2])
        with pytest.raises(ValueError):
            L.breakdown_probe(data, "nope", 1, [1e2])


class TestAsymptoticConstants:
    def test_analytic_c1_at_alpha_one(self):
        c = L.asymptotic_variance(1.0, 1.0)
        assert c.C1 == pytest.approx(0.5, abs=1e-12)

    def test_values_against_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        z34 = scipy_stats.norm.ppf(0.75)
        got = L.asymptotic_variance(1.0, 1.0)
        assert got.c == pytest.approx(z34, abs=1e-11)
        assert got.C == pytest.approx(scipy_stats.gamma.cdf(z34, a=0.5, scale=1.0), rel=1e-10)
        assert got.C == pytest.approx(0.7545, abs=1e-4)
        assert got.avar == pytest.approx(6.0363, abs=5e-4)

    def test_sigma_scaling(self):
        a1 = L.asymptotic_variance(1.0, 1.0)
        a2 = L.asymptotic_variance(1.0, 2.0)
        assert a2.C == pytest.approx(a1.C, rel=1e-12)  # alpha*c/sigma is sigma-free
        assert a2.avar == pytest.approx(4.0 * a1.avar, rel=1e-12)

    def test_monotone_in_alpha_and_limits(self):
        alphas = [1.0, 1.5, 2.0, 3.0, 6.0]
        consts = [L.asymptotic_variance(a, 1.0) for a in alphas]
        for lo, hi in zip(consts, consts[1:]):
            assert lo.C < hi.C and lo.C1 < hi.C1
        # C, C1 -> 1 and avar -> 2 sigma^2 as the band widens
        tail = L.asymptotic_variance(200.0, 1.0)
        assert tail.C == pytest.approx(1.0, abs=1e-12)
        assert tail.C1 == pytest.approx(1.0, abs=1e-12)
        assert tail.avar == pytest.approx(2.0, abs=1e-10)
        assert all(0 < c.C < 1 and 0 < c.C1 < 1 and c.avar > 0 for c in consts)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            L.asymptotic_variance(0.5, 1.0)
        with pytest.raises(ValueError):
            L.asymptotic_variance(1.0, 0.0)


class TestNormalHelpers:
    def test_quantile_inverts_cdf(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        for q in (0.2, 0.5, 0.75, 0.975):
            assert std_normal_quantile(q) == pytest.approx(scipy_stats.norm.ppf(q), abs=1e-11)

    def test_cdf_symmetry(self):
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(1.3) + std_normal_cdf(-1.3) == pytest.approx(1.0, abs=1e-15)

    def test_quantile_domain(self):
        with pytest.raises(ValueError):
            std_normal_quantile(0.0)
