"""Adaptive Gauss-Kronrod behavior."""

import math

import numpy as np
import pytest

from sqbessel import specfun as sf
from sqbessel.quadrature import QuadratureError, gauss_kronrod, gauss_kronrod_vec


class TestScalar:
    def test_chebyshev_weight_normalization(self):
        # int dt / sqrt(1-t^2) over [-1,1] via the cos substitution
        val, err = gauss_kronrod(lambda th: 1.0, 0.0, math.pi, abs_tol=1e-12)
        assert val == pytest.approx(math.pi, abs=1e-12)
        assert err <= 1e-12

    def test_orthogonality(self):
        val, _ = gauss_kronrod(lambda th: math.cos(2 * th), 0.0, math.pi,
                               abs_tol=1e-12)
        assert abs(val) <= 1e-12

    def test_chi2_density_cross_check(self):
        val, _ = gauss_kronrod(lambda w: sf.chi2_pdf(0.18, w), 1e-9, 20.0,
                               abs_tol=1e-10)
        expected = sf.chi2_cdf(0.18, 20.0) - sf.chi2_cdf(0.18, 1e-9)
        assert val == pytest.approx(expected, abs=1e-9)

    def test_oscillatory(self):
        val, _ = gauss_kronrod(lambda x: math.sin(40 * x), 0.0, 1.0,
                               abs_tol=1e-12)
        assert val == pytest.approx((1 - math.cos(40.0)) / 40.0, abs=1e-12)

    def test_reversed_interval_rejected(self):
        with pytest.raises(ValueError):
            gauss_kronrod(lambda x: x, 1.0, 0.0)

    def test_subdivision_limit_reported(self):
        # a needle the panel budget cannot resolve at the requested tolerance
        needle = lambda x: 1.0 / (1e-14 + (x - 0.37) ** 2)
        with pytest.raises(QuadratureError, match="err_est"):
            gauss_kronrod(needle, 0.0, 1.0, abs_tol=1e-12, max_panels=12)


class TestVector:
    def test_polynomial_columns(self):
        f = lambda x: np.stack([np.ones_like(x), x, x ** 2, np.sin(37 * x)],
                               axis=1)
        vals, errs = gauss_kronrod_vec(f, 0.0, 1.0, abs_tol=1e-12)
        expected = np.array([1.0, 0.5, 1.0 / 3.0, (1 - np.cos(37.0)) / 37.0])
        assert np.allclose(vals, expected, atol=1e-12)
        assert errs.max() <= 1e-12

    def test_matches_scalar(self):
        f_vec = lambda x: np.stack([np.exp(-x * x)], axis=1)
        vals, _ = gauss_kronrod_vec(f_vec, -2.0, 3.0, abs_tol=1e-12)
        ref, _ = gauss_kronrod(lambda x: math.exp(-x * x), -2.0, 3.0,
                               abs_tol=1e-12)
        assert vals[0] == pytest.approx(ref, abs=1e-13)

    def test_deterministic_partition(self):
        f = lambda x: np.stack([np.sqrt(np.abs(x - 0.3)), x ** 3], axis=1)
        a, _ = gauss_kronrod_vec(f, 0.0, 1.0, abs_tol=1e-10)
        b, _ = gauss_kronrod_vec(f, 0.0, 1.0, abs_tol=1e-10)
        assert np.array_equal(a, b)
