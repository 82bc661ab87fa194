"""Gauss rules, the adaptive panel integrator, and the half-line transform."""

from __future__ import annotations

import math

import numpy as np
import pytest

from blochest.quadrature import (
    QuadratureError,
    QuadResult,
    adaptive_quad,
    gauss_legendre,
    integrate_half_line,
)


class TestGaussLegendre:
    def test_basic_structure(self):
        x, w = gauss_legendre(7)
        assert x.shape == w.shape == (7,)
        assert np.all(np.diff(x) > 0)
        assert np.allclose(x, -x[::-1], atol=1e-15)
        assert w.sum() == pytest.approx(2.0, abs=1e-14)
        assert np.all(w > 0)

    @pytest.mark.parametrize("n", [2, 5, 11])
    def test_polynomial_exactness(self, n):
        # An n-point rule integrates monomials exactly through degree 2n-1.
        x, w = gauss_legendre(n)
        for k in range(2 * n):
            exact = 0.0 if k % 2 else 2.0 / (k + 1)
            assert float(w @ x**k) == pytest.approx(exact, abs=1e-13)

    def test_cached_arrays_read_only(self):
        x, _ = gauss_legendre(4)
        with pytest.raises(ValueError):
            x[0] = 0.0

    def test_order_validated(self):
        with pytest.raises(ValueError):
            gauss_legendre(0)


class TestAdaptiveQuad:
    def test_smooth_exponential(self):
        res = adaptive_quad(np.exp, 0.0, 1.0, abs_tol=1e-12)
        assert isinstance(res, QuadResult)
        assert res.value == pytest.approx(math.e - 1.0, abs=1e-13)
        assert res.error <= 1e-12
        assert res.intervals >= 1

    def test_integrable_endpoint_singularity(self):
        res = adaptive_quad(lambda s: 1.0 / (2.0 * np.sqrt(s)), 0.0, 1.0, abs_tol=1e-9)
        assert res.value == pytest.approx(1.0, abs=5e-9)

    def test_oscillatory(self):
        res = adaptive_quad(lambda x: np.sin(40.0 * x), 0.0, 1.0, abs_tol=1e-12)
        assert res.value == pytest.approx((1.0 - math.cos(40.0)) / 40.0, abs=1e-12)

    def test_initial_splits_hit_interior_kink(self):
        f = lambda x: np.abs(x - 0.3) ** 0.5
        exact = (0.3**1.5 + 0.7**1.5) / 1.5
        res = adaptive_quad(f, 0.0, 1.0, abs_tol=1e-10, initial_splits=(0.3,))
        assert res.value == pytest.approx(exact, abs=1e-9)

    def test_limit_exhaustion_reports_partial_result(self):
        # A hard singularity with an absurdly small panel budget must fail
        # loudly and carry the best value/error pair in the exception.
        with pytest.raises(QuadratureError) as exc:
            adaptive_quad(lambda s: 1.0 / np.sqrt(np.abs(s)), 0.0, 1.0,
                          abs_tol=1e-14, limit=4)
        assert exc.value.value is not None
        assert exc.value.error is not None
        assert str(exc.value.value) in str(exc.value)

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            adaptive_quad(np.exp, 1.0, 0.0)


class TestIntegrateHalfLine:
    def test_unit_exponential(self):
        res = integrate_half_line(lambda x: np.exp(-x), abs_tol=1e-11)
        assert res.value == pytest.approx(1.0, abs=1e-11)

    def test_gamma_moment(self):
        res = integrate_half_line(lambda x: x**3 * np.exp(-x), abs_tol=1e-10)
        assert res.value == pytest.approx(6.0, abs=1e-9)

    def test_heavy_tail(self):
        # x^(-2) tail: integral of 1/(1+x)^2 from 0 to infinity is 1.
        res = integrate_half_line(lambda x: 1.0 / (1.0 + x) ** 2, abs_tol=1e-10)
        assert res.value == pytest.approx(1.0, abs=1e-9)

    def test_x_max_truncates(self):
        # With a cutoff the transform integrates [0, x_max] only.
        res = integrate_half_line(lambda x: np.exp(-x), abs_tol=1e-11, x_max=2.0)
        assert res.value == pytest.approx(1.0 - math.exp(-2.0), abs=1e-10)

    def test_gaussian_half_line(self):
        res = integrate_half_line(lambda x: np.exp(-0.5 * x * x), abs_tol=1e-10)
        assert res.value == pytest.approx(math.sqrt(0.5 * math.pi), abs=1e-9)
