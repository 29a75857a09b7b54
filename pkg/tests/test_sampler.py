"""Runtime inversion and sampling distributions."""

import math

import numpy as np
import pytest

from sqbessel import chebfit as cf
from sqbessel import sampler as sp
from sqbessel import specfun as sf
from sqbessel.stats import ks_critical_value, ks_statistic_1samp


def _toy_patch(coeffs):
    c = np.asarray(coeffs, dtype=float)
    return cf.ChebyshevPatch(
        delta_lo=0.1, delta_hi=0.2,
        region=cf.RegionSpec(region_id=cf.Region.MIDDLE),
        order_delta=c.shape[0] - 1, order_u=c.shape[1] - 1, coeffs=c,
        target_accuracy=1.0,
    )


class TestClenshaw2d:
    def test_constant_patch(self):
        patch = _toy_patch([[7.0]])
        for alpha, x in ((-1, -1), (0.3, -0.5), (1, 1)):
            assert sp.clenshaw2d(patch, alpha, x) == 7.0

    def test_bilinear_term(self):
        patch = _toy_patch([[0.0, 0.0], [0.0, 1.0]])  # c_11 T_1(a) T_1(x)
        assert sp.clenshaw2d(patch, 0.3, -0.5) == pytest.approx(-0.15,
                                                                abs=1e-15)

    def test_matches_naive_on_random_points(self, patchset, rng_np):
        for region in cf.Region:
            patch = patchset.patches[region]
            alphas = rng_np.uniform(-1, 1, 10)
            xs = rng_np.uniform(-1, 1, 100)
            for alpha in alphas:
                fast = sp.clenshaw2d(patch, float(alpha), xs)
                slow = sp.eval2d_naive(patch, float(alpha), xs)
                assert np.allclose(fast, slow, rtol=1e-12,
                                   atol=1e-12 * np.abs(slow).max())

    def test_golden_first_patch_center(self, patchset):
        patch = patchset.patches[cf.Region.FIRST]
        assert sp.clenshaw2d(patch, 0.0, 0.0) == pytest.approx(
            sp.eval2d_naive(patch, 0.0, 0.0), rel=1e-13)


class TestCentralInverse:
    def test_boundary_maps_to_w_minus(self, patchset):
        u = sf.chi2_cdf(0.18, 0.1)
        got = sp.central_chi2_inverse(patchset, 0.18, u)
        assert got == pytest.approx(0.1, abs=1e-6)

    def test_matches_reference_inverse(self, patchset):
        for u in (0.3, 0.5, 0.9, 0.99):
            got = sp.central_chi2_inverse(patchset, 0.15, u)
            ref = sf.chi2_inv_reference(0.15, u)
            assert got == pytest.approx(ref, abs=1e-6)

    def test_tail_top_exact_fallback(self, patchset):
        # probabilities beyond F_delta(20) resolve by root finding, so the
        # clamp at 1 - 1e-8 really is the only truncation
        got = sp.central_chi2_inverse(patchset, 0.18, 1 - 1e-8)
        ref = sf.chi2_inv_reference(0.18, 1 - 1e-8)
        assert got == pytest.approx(ref, rel=1e-10)
        clamped = sp.central_chi2_inverse(patchset, 0.18, 1 - 1e-12)
        assert clamped == got  # above the cap u clamps to 1 - 1e-8

    def test_patch_top_value(self, patchset):
        # just below F_delta(20) the tail patch itself serves values near 20
        u = 1.0 - 2.0 * sf.chi2_sf(0.18, 20.0)
        got = sp.central_chi2_inverse(patchset, 0.18, u)
        assert abs(sf.chi2_cdf(0.18, got) - u) <= 1e-6

    def test_inverse_accuracy_grid(self, patchset):
        deltas = np.linspace(0.1, 0.2, 10)
        us = np.linspace(1e-6, 1 - 1e-8, 60)
        worst = 0.0
        for delta in deltas:
            w = sp.central_chi2_inverse(patchset, delta, us)
            for wi, ui in zip(w, us):
                res = abs((sf.chi2_cdf(delta, wi) if wi > 0 else 0.0) - ui)
                worst = max(worst, res)
        assert worst <= 1e-6

    def test_inverse_accuracy_coarse_patch(self, patchset_coarse):
        deltas = np.linspace(0.1, 0.2, 8)
        us = np.linspace(1e-6, 1 - 1e-8, 50)
        worst = 0.0
        for delta in deltas:
            w = sp.central_chi2_inverse(patchset_coarse, delta, us)
            for wi, ui in zip(w, us):
                res = abs((sf.chi2_cdf(delta, wi) if wi > 0 else 0.0) - ui)
                worst = max(worst, res)
        assert worst <= 2e-4

    def test_out_of_interval_delta(self, patchset):
        with pytest.raises(ValueError, match="outside patch interval"):
            sp.central_chi2_inverse(patchset, 0.5, 0.5)

    def test_collection_dispatch(self, collection):
        w1 = sp.central_chi2_inverse(collection, 0.15, 0.9)
        w2 = sp.central_chi2_inverse(collection, 0.25, 0.9)
        assert abs(sf.chi2_cdf(0.15, w1) - 0.9) <= 1e-6
        assert abs(sf.chi2_cdf(0.25, w2) - 0.9) <= 1e-6

    def test_patch_inverse_first_region_absolute_accuracy(self, patchset):
        # the pure-patch path carries the documented absolute error in the
        # steep zone; check it in w-space where its guarantee lives
        delta = 0.15
        tau = cf.trailing_threshold(patchset.target_accuracy, cf.Region.FIRST)
        for u in (0.05, 0.2, 0.4, 0.6):
            got = sp.patch_inverse(patchset, delta, u)
            ref = sf.chi2_inv_reference(delta, u)
            assert abs(got - ref) <= 10 * tau


class TestRngStream:
    def test_reproducible(self):
        a = sp.RngStream(42, 7).uniform(1000)
        b = sp.RngStream(42, 7).uniform(1000)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        a = sp.RngStream(42, 7).uniform(1000)
        b = sp.RngStream(42, 8).uniform(1000)
        assert not np.array_equal(a, b)

    def test_tuple_ids(self):
        a = sp.RngStream(42, (1, 2)).uniform(10)
        b = sp.RngStream(42, (1, 3)).uniform(10)
        assert not np.array_equal(a, b)

    def test_open_interval(self):
        u = sp.RngStream(0, 0).uniform(10**5)
        assert (u > 0).all() and (u < 1).all()


class TestPoisson:
    def test_zero_mean(self):
        assert sp.sample_poisson(0.0, sp.RngStream(1, 0)) == 0
        assert (sp.sample_poisson(0.0, sp.RngStream(1, 0), size=5) == 0).all()

    def test_mean_five(self):
        k = sp.sample_poisson(5.0, sp.RngStream(5, 1), size=10**6)
        n = k.size
        se = math.sqrt(5.0 / n)
        assert abs(k.mean() - 5.0) <= 4 * se
        # var(sample variance) ~ (mu4 - sigma^4)/n with mu4 = lam(1 + 3 lam)
        var_se = math.sqrt((5.0 * 16.0 - 25.0) / n)
        assert abs(k.var() - 5.0) <= 5 * var_se
        assert k.min() >= 0

    def test_small_mean_zero_probability(self):
        mean = 0.0576
        k = sp.sample_poisson(mean, sp.RngStream(5, 2), size=10**6)
        p0 = (k == 0).mean()
        target = math.exp(-mean)
        se = math.sqrt(target * (1 - target) / 10**6)
        assert abs(p0 - target) <= 4 * se

    def test_rejection_branch(self):
        k = sp.sample_poisson(50.0, sp.RngStream(5, 3), size=2 * 10**5)
        se = math.sqrt(50.0 / k.size)
        assert abs(k.mean() - 50.0) <= 4 * se
        assert abs(k.var() / 50.0 - 1.0) <= 0.05

    def test_negative_mean_rejected(self):
        with pytest.raises(ValueError):
            sp.sample_poisson(-1.0, sp.RngStream(0, 0))


class TestNormal:
    def test_moments(self):
        z = sp.sample_standard_normal(sp.RngStream(7, 0), size=10**6)
        n = z.size
        assert abs(z.mean()) <= 4e-3
        assert abs(z.var() - 1.0) <= 5 * math.sqrt(2.0 / n)
        skew = np.mean(z ** 3)
        kurt = np.mean(z ** 4)
        assert abs(skew) <= 5 * math.sqrt(15.0 / n)
        assert abs(kurt - 3.0) <= 5 * math.sqrt(96.0 / n)

    def test_square_has_unit_mean(self):
        z = sp.sample_standard_normal(sp.RngStream(7, 1), size=10**6)
        assert abs(np.mean(z * z) - 1.0) <= 4 * math.sqrt(2.0 / z.size)


class TestSampleCentral:
    def test_mean_and_variance(self, patchset):
        delta = 0.18
        x = sp.sample_central(patchset, delta, sp.RngStream(11, 0), size=10**6)
        n = x.size
        assert abs(x.mean() - delta) <= 4 * math.sqrt(2 * delta / n)
        var_se = math.sqrt(
            (sf.noncentral_chi2_moments(sf.NoncentralParams(delta, 0.0), 4)[3]
             - (2 * delta + delta ** 2) ** 2) / n)
        assert abs(x.var() - 2 * delta) <= 5 * var_se

    def test_deterministic(self, patchset):
        a = sp.sample_central(patchset, 0.15, sp.RngStream(3, 9), size=512)
        b = sp.sample_central(patchset, 0.15, sp.RngStream(3, 9), size=512)
        assert np.array_equal(a, b)


class TestSampleNoncentral:
    def test_lambda_zero_is_central(self, patchset):
        params = sf.NoncentralParams(0.1, 0.0)
        x = sp.sample_noncentral(patchset, params, sp.RngStream(21, 0),
                                 size=2048)
        y = sp.sample_central(patchset, 0.1, sp.RngStream(21, 0), size=2048)
        # lam = 0 draws one Poisson uniform first, so sequences differ, but
        # the supplement must be exactly zero
        extra = sp.sample_noncentral_extra(0.0, sp.RngStream(21, 1), size=2048)
        assert (extra == 0.0).all()
        assert x.min() >= 0.0 and y.min() >= 0.0

    @pytest.mark.parametrize("lam", [0.11517, 5.0, 16.0, 27.3])
    def test_mean(self, patchset, lam):
        params = sf.NoncentralParams(0.18, lam)
        x = sp.sample_noncentral(patchset, params, sp.RngStream(23, int(lam)),
                                 size=10**6)
        mean = 0.18 + lam
        var = 2 * (0.18 + 2 * lam)
        assert abs(x.mean() - mean) <= 4 * math.sqrt(var / x.size)

    def test_small_delta_large_lambda_mean(self, collection):
        # tiny degrees of freedom from the [0.01, 0.02] tables combined with
        # the shifted-normal branch
        params = sf.NoncentralParams(0.01, 15.995)
        x = sp.sample_noncentral(collection, params, sp.RngStream(23, 99),
                                 size=10**6)
        mean = 0.01 + 15.995
        var = 2 * (0.01 + 2 * 15.995)
        assert abs(x.mean() - mean) <= 4 * math.sqrt(var / x.size)

    @pytest.mark.slow
    @pytest.mark.parametrize("delta", [0.1, 0.18])
    @pytest.mark.parametrize("lam", [0.0, 0.5, 5.0, 16.0])
    def test_ks_against_analytic_cdf(self, collection, delta, lam):
        params = sf.NoncentralParams(delta, lam)
        n = 10**5
        x = sp.sample_noncentral(collection, params,
                                 sp.RngStream(29, int(10 * lam)), size=n)
        d = ks_statistic_1samp(x, lambda v: sf.noncentral_chi2_cdf(params, v))
        assert d < ks_critical_value(0.001, n)

    def test_moments_against_analytic(self, patchset):
        params = sf.NoncentralParams(0.1, 0.11517)
        n = 5 * 10**5
        x = sp.sample_noncentral(patchset, params, sp.RngStream(31, 0), size=n)
        analytic = sf.noncentral_chi2_moments(params, 10)
        from sqbessel.stats import jackknife_moment_se
        for k in range(1, 11):
            se = jackknife_moment_se(x, k)
            assert abs(np.mean(x ** k) - analytic[k - 1]) <= 5 * se
