import math

import numpy as np
import pytest

from locscale import numeric
from locscale.util import UsageError


def t4_sf(t):
    """Closed form upper tail of Student t with 4 degrees of freedom."""
    u = t / math.sqrt(t * t + 4.0)
    return 0.5 - 0.75 * (u - u ** 3 / 3.0)


# ── gamma ────────────────────────────────────────────────────────────────────

class TestLnGamma:
    def test_one(self):
        assert numeric.ln_gamma(1.0) == pytest.approx(0.0, abs=1e-15)

    def test_factorial(self):
        assert numeric.ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)

    def test_half(self):
        assert numeric.ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)
        assert numeric.ln_gamma(0.5) == pytest.approx(0.572364943, abs=1e-9)

    def test_domain(self):
        with pytest.raises(numeric.DomainError):
            numeric.ln_gamma(0.0)


class TestIncompleteGamma:
    def test_zero(self):
        assert numeric.reg_incomplete_gamma_upper(1.0, 0.0) == 1.0

    def test_exponential(self):
        assert numeric.reg_incomplete_gamma_upper(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_shape_two(self):
        assert numeric.reg_incomplete_gamma_upper(2.0, 2.0) == pytest.approx(3.0 * math.exp(-2.0), rel=1e-14)
        assert numeric.reg_incomplete_gamma_upper(2.0, 2.0) == pytest.approx(0.406005850, abs=1e-9)

    def test_domain(self):
        with pytest.raises(numeric.DomainError):
            numeric.reg_incomplete_gamma_upper(-1.0, 1.0)
        with pytest.raises(numeric.DomainError):
            numeric.reg_incomplete_gamma_upper(1.0, -1.0)


class TestIncompleteBeta:
    def test_uniform(self):
        assert numeric.reg_incomplete_beta(1.0, 1.0, 0.3) == pytest.approx(0.3, rel=1e-14)

    @pytest.mark.parametrize("a", [0.5, 2.0, 7.0])
    def test_symmetry(self, a):
        assert numeric.reg_incomplete_beta(a, a, 0.5) == pytest.approx(0.5, rel=1e-13)

    def test_closed_form(self):
        assert numeric.reg_incomplete_beta(1.0, 2.0, 0.1) == pytest.approx(0.19, rel=1e-13)

    def test_domain(self):
        with pytest.raises(numeric.DomainError):
            numeric.reg_incomplete_beta(1.0, 1.0, 1.5)
        with pytest.raises(numeric.DomainError):
            numeric.reg_incomplete_beta(0.0, 1.0, 0.5)


# ── distributions ────────────────────────────────────────────────────────────

class TestChi2:
    def test_zero(self):
        assert numeric.chi2_sf(0.0, 4) == 1.0

    def test_closed_form_df4(self):
        x = np.linspace(0.0, 80.0, 801)
        expected = np.exp(-x / 2.0) * (1.0 + x / 2.0)
        np.testing.assert_allclose(numeric.chi2_sf(x, 4), expected, rtol=1e-10, atol=1e-12)

    def test_fisher_pair(self):
        x = -4.0 * math.log(0.05)
        assert x == pytest.approx(11.98293, abs=1e-5)
        assert numeric.chi2_sf(x, 4) == pytest.approx(0.0174786, abs=1e-7)

    def test_critical_value(self):
        assert numeric.chi2_sf(9.4877, 4) == pytest.approx(0.05, abs=1e-4)

    def test_deep_tail_keeps_precision(self):
        x = 200.0
        assert numeric.chi2_sf(x, 4) == pytest.approx(math.exp(-x / 2.0) * (1.0 + x / 2.0), rel=1e-10)

    def test_domain(self):
        with pytest.raises(numeric.DomainError):
            numeric.chi2_sf(-1.0, 4)
        with pytest.raises(numeric.DomainError):
            numeric.chi2_sf(1.0, 0)

    def test_nan_propagates(self):
        out = numeric.chi2_sf(np.array([0.0, np.nan]), 4)
        assert out[0] == 1.0
        assert np.isnan(out[1])


class TestStudentT:
    def test_symmetry(self):
        assert numeric.student_t_sf(0.0, 7) == pytest.approx(0.5, abs=1e-15)

    def test_cauchy(self):
        assert numeric.student_t_sf(1.0, 1) == pytest.approx(0.25, rel=1e-14)

    def test_closed_form_df4(self):
        t = 1.0 / math.sqrt(0.375 / 4.0)
        assert numeric.student_t_sf(t, 4) == pytest.approx(t4_sf(t), rel=1e-10)
        assert numeric.student_t_sf(t, 4) == pytest.approx(0.015453, abs=1e-6)

    def test_negative_t(self):
        assert numeric.student_t_sf(-2.0, 4) == pytest.approx(1.0 - t4_sf(2.0), rel=1e-12)

    def test_scalar_returns_float(self):
        assert isinstance(numeric.student_t_sf(1.0, 3), float)


class TestF:
    def test_zero(self):
        assert numeric.f_sf(0.0, 3, 5) == 1.0

    @pytest.mark.parametrize("d", [1, 4, 30])
    def test_equal_df_median(self, d):
        assert numeric.f_sf(1.0, d, d) == pytest.approx(0.5, rel=1e-12)

    def test_t_relation(self):
        assert numeric.f_sf(0.8, 1, 4) == pytest.approx(2.0 * t4_sf(math.sqrt(0.8)), rel=1e-10)
        assert numeric.f_sf(0.8, 1, 4) == pytest.approx(0.421648, abs=1e-6)

    def test_t_relation_vectorized(self):
        t = np.linspace(0.1, 6.0, 40)
        for df in (3, 10, 57):
            np.testing.assert_allclose(numeric.f_sf(t ** 2, 1, df), 2.0 * numeric.student_t_sf(t, df), rtol=1e-10)

    def test_two_numerator_df(self):
        assert numeric.f_sf(4.0, 2, 3) == pytest.approx((11.0 / 3.0) ** -1.5, rel=1e-12)

    def test_domain(self):
        with pytest.raises(numeric.DomainError):
            numeric.f_sf(-0.1, 1, 4)


class TestNormal:
    def test_median(self):
        assert numeric.normal_quantile(0.5) == pytest.approx(0.0, abs=1e-15)

    def test_975(self):
        assert numeric.normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)

    def test_blom_rank(self):
        assert numeric.normal_quantile(0.625 / 3.25) == pytest.approx(-0.86942, abs=1e-4)

    def test_inverse_of_sf(self):
        p = np.array([1e-10, 0.01, 0.3, 0.9])
        np.testing.assert_allclose(numeric.normal_sf(numeric.normal_quantile(p)), 1.0 - p, rtol=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.5])
    def test_domain(self, p):
        with pytest.raises(numeric.DomainError):
            numeric.normal_quantile(p)


class TestBeta12:
    def test_values(self):
        assert numeric.beta12_cdf(0.05) == pytest.approx(0.0975, rel=1e-14)
        assert numeric.beta12_cdf(0.0) == 0.0
        assert numeric.beta12_cdf(1.0) == 1.0

    def test_matches_incomplete_beta(self):
        w = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(numeric.beta12_cdf(w), numeric.reg_incomplete_beta(1.0, 2.0, w), atol=1e-14)

    def test_domain(self):
        with pytest.raises(numeric.DomainError):
            numeric.beta12_cdf(1.2)


class TestDomainError:
    def test_is_usage_error(self):
        assert issubclass(numeric.DomainError, UsageError)


class TestDegreesOfFreedom:
    def test_equality(self):
        assert numeric.DegreesOfFreedom(1, 4) == numeric.DegreesOfFreedom(1, 4)
        assert numeric.DegreesOfFreedom(4) != numeric.DegreesOfFreedom(4, 1)

    def test_repr(self):
        assert repr(numeric.DegreesOfFreedom(2, 3)) == "DegreesOfFreedom(2, 3)"
        assert repr(numeric.DegreesOfFreedom(4)) == "DegreesOfFreedom(4)"


# ── identities and monotonicity ──────────────────────────────────────────────

class TestIdentities:
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_incomplete_beta_reflection(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(0.1, 50.0, size=200)
        b = rng.uniform(0.1, 50.0, size=200)
        x = rng.uniform(0.0, 1.0, size=200)
        total = numeric.reg_incomplete_beta(a, b, x) + numeric.reg_incomplete_beta(b, a, 1.0 - x)
        np.testing.assert_allclose(total, 1.0, atol=1e-10)

    @pytest.mark.parametrize("sf,args", [
        (numeric.chi2_sf, (1.0,)),
        (numeric.chi2_sf, (4.0,)),
        (numeric.chi2_sf, (30.0,)),
        (numeric.student_t_sf, (2.0,)),
        (numeric.student_t_sf, (1998.0,)),
        (numeric.f_sf, (1.0, 4.0)),
        (numeric.f_sf, (2.0, 1997.0)),
    ])
    def test_survival_functions_decrease(self, sf, args):
        x = np.linspace(0.0, 60.0, 601)
        p = sf(x, *args)
        assert np.all(np.diff(p) <= 0.0)
        assert np.all((p >= 0.0) & (p <= 1.0))

    def test_normal_sf_decreases(self):
        assert np.all(np.diff(numeric.normal_sf(np.linspace(-10.0, 10.0, 401))) <= 0.0)

    def test_normal_quantile_increases(self):
        p = np.linspace(1e-12, 1.0 - 1e-12, 1001)
        assert np.all(np.diff(numeric.normal_quantile(p)) > 0.0)
