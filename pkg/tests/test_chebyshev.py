"""
Tests for Chebyshev polynomials of the second kind and their expansions.
"""

import math
import pytest
import numpy as np
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy.integrate import quad
from scipy.special import roots_chebyu

from engine.chebyshev import (
    ChebyshevSeries,
    beta_abs_mean,
    coeff_a,
    coeff_b,
    expand_indicator,
    expand_power,
    extreme_indicator_coefficients,
    lemma4_constant,
    linearize_product,
    power_constant,
    sign_indicator_coefficients,
    u_eval,
    u_eval_array,
)
from shared.config import settings
from shared.exceptions import DomainError, UnsupportedParameterError


class TestEvaluation:
    def test_examples(self):
        assert u_eval(2, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert u_eval(3, 1.0) == pytest.approx(4.0)
        assert u_eval(5, 0.3) == pytest.approx(1.01376, abs=1e-12)
        assert u_eval(0, -0.7) == 1.0

    def test_out_of_domain(self):
        with pytest.raises(DomainError):
            u_eval(2, 1.5)
        with pytest.raises(DomainError):
            u_eval(-1, 0.2)
        with pytest.raises(DomainError):
            u_eval_array(2, np.array([0.0, -1.01]))

    def test_trigonometric_identity(self):
        phi = np.linspace(0.1, 3.0, 50)
        for k in range(12):
            np.testing.assert_allclose(
                u_eval_array(k, np.cos(phi)), np.sin((k + 1) * phi) / np.sin(phi), atol=1e-10
            )

    def test_bounded_by_k_plus_one(self):
        xs = np.linspace(-1, 1, 1001)
        for k in range(20):
            assert np.max(np.abs(u_eval_array(k, xs))) <= k + 1 + 1e-9

    def test_series_clenshaw(self):
        series = ChebyshevSeries(coefficients=[1.0, 0.0, 2.0, -0.5])
        xs = np.linspace(-1, 1, 21)
        expected = 1.0 + 2.0 * u_eval_array(2, xs) - 0.5 * u_eval_array(3, xs)
        np.testing.assert_allclose(series.evaluate(xs), expected, atol=1e-12)
        assert series.evaluate(0.25) == pytest.approx(1.0 + 2.0 * u_eval(2, 0.25) - 0.5 * u_eval(3, 0.25))
        assert series.L == 3 and series[7] == 0
        assert series.to_csv_rows()[2] == (2, 2.0)


class TestLinearization:
    def test_examples(self):
        assert linearize_product([1, 1]).coefficients == [1, 0, 1]
        assert linearize_product([1, 2]).coefficients == [0, 1, 0, 1]
        assert linearize_product([4]).coefficients == [0, 0, 0, 0, 1]
        assert linearize_product([]).coefficients == [1]

    @hyp_settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=12), min_size=1, max_size=4))
    def test_matches_pointwise_product(self, orders):
        series = linearize_product(orders)
        xs = np.linspace(-1, 1, 41)
        product = np.ones_like(xs)
        for k in orders:
            product *= u_eval_array(k, xs)
        np.testing.assert_allclose(series.evaluate(xs), product, atol=1e-9 * max(1.0, np.max(np.abs(product))))
        assert all(isinstance(c, int) and c >= 0 for c in series.coefficients)
        if sum(orders) % 2:
            assert series.coefficients[0] == 0

    def test_beta_abs_mean_and_constant(self):
        assert beta_abs_mean([1, 1]) == 2
        # U_1^2 = U_0 + U_2: max beta = 1, (K+1)/prod(k+1) = 3/4
        assert lemma4_constant([1, 1]) == pytest.approx(0.75)

    def test_too_large(self):
        with pytest.raises(DomainError):
            linearize_product([6000, 6000])


class TestPowers:
    def test_constants(self):
        assert power_constant(2) == pytest.approx(1.0)
        assert power_constant(4) == pytest.approx(2.0)
        assert power_constant(1) == pytest.approx(8 / (3 * math.pi))

    def test_signed_coefficients(self):
        assert coeff_a(2, 2) == pytest.approx(0.25)
        assert coeff_a(2, 0) == pytest.approx(0.25)
        assert coeff_a(1, 1) == pytest.approx(0.5)
        assert coeff_a(2, 1) == 0.0
        with pytest.raises(UnsupportedParameterError):
            coeff_a(1.5, 1)

    def test_unsigned_coefficients(self):
        assert coeff_b(1, 0) == pytest.approx(4 / (3 * math.pi), abs=1e-12)
        assert coeff_b(2, 1) == pytest.approx(0.25)
        assert coeff_b(2, 2) == 0.0

    def test_expand_power_examples(self):
        np.testing.assert_allclose(expand_power(2).coefficients, [0.25, 0, 0.25], atol=1e-15)
        np.testing.assert_allclose(expand_power(1).coefficients, [0, 0.5], atol=1e-15)
        odd = expand_power(3).coefficients
        assert [ell for ell, c in enumerate(odd) if abs(c) > 1e-15] == [1, 3]

    @pytest.mark.parametrize("alpha", range(1, 9))
    def test_reconstructs_monomial(self, alpha):
        xs = np.random.default_rng(alpha).uniform(-1, 1, 1000)
        np.testing.assert_allclose(expand_power(alpha).evaluate(xs), xs ** alpha, atol=1e-10)

    @pytest.mark.parametrize("alpha", [2, 4, 6])
    def test_even_absolute_power_is_exact(self, alpha):
        xs = np.linspace(-1, 1, 101)
        np.testing.assert_allclose(expand_power(alpha, signed=False).evaluate(xs), np.abs(xs) ** alpha, atol=1e-10)

    def test_odd_absolute_power_truncates(self):
        series = expand_power(1, signed=False, L=200)
        xs = np.concatenate((np.linspace(-0.9, -0.2, 15), np.linspace(0.2, 0.9, 15)))
        np.testing.assert_allclose(series.evaluate(xs), np.abs(xs), atol=1e-2)

    def test_unsigned_constant_term_matches_quadrature(self):
        for alpha in (0.5, 1.0, 3.0):
            mass, _ = quad(lambda x: 2 / math.pi * math.sqrt(1 - x * x) * abs(x) ** alpha, -1, 1)
            assert coeff_b(alpha, 0) == pytest.approx(mass, abs=1e-8)


class TestIndicators:
    def test_examples(self):
        assert expand_indicator(-0.5, 0.5, 0)[0] == pytest.approx(0.608998, abs=1e-6)
        assert expand_indicator(-1, 1, 0)[0] == pytest.approx(1.0)
        assert sign_indicator_coefficients(4)[0] == pytest.approx(0.5)
        assert extreme_indicator_coefficients(0.5, 3)[0] == pytest.approx(0.608998, abs=1e-6)

    @pytest.mark.parametrize("c,d", [(-0.5, 0.5), (0.0, 1.0), (-0.9, 0.2), (0.3, 0.31)])
    def test_matches_quadrature(self, c, d):
        series = expand_indicator(c, d, 10)
        for ell in range(11):
            value, _ = quad(lambda x: 2 / math.pi * math.sqrt(1 - x * x) * u_eval(ell, x), c, d,
                            epsabs=1e-12, epsrel=1e-12)
            assert series[ell] == pytest.approx(value, abs=1e-8)

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            expand_indicator(0.5, 0.5)
        with pytest.raises(DomainError):
            extreme_indicator_coefficients(1.5)

class TestOrthogonality:
    def test_sato_tate_gram_matrix(self):
        # Gauss quadrature for the weight sqrt(1 - x^2); exact up to degree 2n - 1
        nodes, weights = roots_chebyu(40)
        basis = np.array([u_eval_array(k, nodes) for k in range(31)])
        gram = 2 / math.pi * (basis * weights) @ basis.T
        np.testing.assert_allclose(gram, np.eye(31), atol=1e-8)

    @pytest.mark.parametrize("c,d", [(-0.5, 0.5), (0.0, 1.0), (-1.0, 0.2), (0.3, 0.31)])
    def test_indicator_coefficients_decay(self, c, d):
        series = expand_indicator(c, d)
        assert len(series.coefficients) == settings.chebyshev_truncation + 1
        for ell in range(1, len(series.coefficients)):
            assert ell * abs(series[ell]) <= 4 / math.pi + 1e-12
