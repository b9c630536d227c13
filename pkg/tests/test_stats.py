import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from bootcover.stats import (DEFAULT_QUAD, DomainError, IntegrationError, QuadratureSpec, beta_cdf,
                             beta_quantile, binom_cdf, binom_cdf_left, binom_cdf_sum, binom_pmf,
                             count_thresholds, gamma_ln, integrate, integrate_pieces, normal_cdf,
                             normal_pdf, normal_quantile, t_cdf, t_pdf, t_quantile)


class TestBinomial:
    def test_pmf_examples(self):
        assert binom_pmf(0, 5, 0.0) == 1.0
        assert binom_pmf(1, 2, 0.5) == pytest.approx(0.5, abs=1e-15)
        assert binom_pmf(2, 4, 0.25) == pytest.approx(0.2109375, abs=1e-15)

    def test_pmf_rejects_k_outside_support(self):
        with pytest.raises(DomainError):
            binom_pmf(6, 5, 0.3)
        with pytest.raises(DomainError):
            binom_pmf(-1, 5, 0.3)

    def test_pmf_large_n_matches_scipy(self):
        k = np.arange(0, 10001, 500)
        assert np.allclose(binom_pmf(k, 10000, 0.37), sps.binom.pmf(k, 10000, 0.37), rtol=1e-9, atol=1e-300)

    def test_cdf_examples(self):
        assert binom_cdf(1, 2, 0.5) == pytest.approx(0.75, abs=1e-15)
        assert binom_cdf(1, 4, 0.25) == pytest.approx(0.73828125, abs=1e-15)
        for p in (0.0, 0.3, 1.0):
            assert binom_cdf(7, 7, p) == 1.0

    def test_cdf_clamps(self):
        assert binom_cdf(-1, 5, 0.3) == 0.0
        assert binom_cdf(9, 5, 0.3) == 1.0
        assert binom_cdf(2.7, 5, 0.3) == binom_cdf(2, 5, 0.3)

    def test_cdf_rejects_bad_p(self):
        with pytest.raises(DomainError):
            binom_cdf(1, 3, 1.2)

    def test_cdf_degenerate_p(self):
        assert binom_cdf(0, 5, 0.0) == 1.0
        assert binom_cdf(4, 5, 1.0) == 0.0

    def test_beta_route_matches_summation(self):
        ps = np.linspace(0.01, 0.99, 99)
        for n in (1, 7, 60, 500):
            for k in range(0, n + 1, max(1, n // 25)):
                beta = binom_cdf(k, n, ps)
                direct = np.array([binom_cdf_sum(k, n, p) for p in ps])
                assert np.max(np.abs(beta - direct)) < 1e-10

    def test_large_n_against_scipy(self):
        k = np.arange(0, 10001, 97)
        assert np.allclose(binom_cdf(k, 10000, 0.5), sps.binom.cdf(k, 10000, 0.5), atol=1e-12)

    @given(st.integers(1, 200), st.floats(0, 1), st.floats(0, 1))
    def test_cdf_monotone_in_p(self, n, p1, p2):
        lo, hi = sorted((p1, p2))
        k = n // 3
        assert binom_cdf(k, n, hi) <= binom_cdf(k, n, lo) + 1e-14

    @given(st.integers(1, 200), st.floats(0, 1))
    def test_cdf_monotone_in_k(self, n, p):
        vals = binom_cdf(np.arange(-1, n + 1), n, p)
        assert np.all(np.diff(vals) >= -1e-14)

    def test_left_limit_examples(self):
        assert binom_cdf_left(2.0, 5, 0.3) == binom_cdf(1, 5, 0.3)
        assert binom_cdf_left(2.5, 5, 0.3) == binom_cdf(2, 5, 0.3)
        assert binom_cdf_left(0.0, 9, 0.4) == 0.0

    @given(st.floats(-2, 12), st.floats(0.01, 0.99))
    def test_left_limit_below_value(self, x, p):
        n = 10
        # arguments within the snap tolerance of an integer count as that integer
        r = round(x)
        snapped = abs(x - r) <= 1e-12 * max(1.0, abs(x))
        left = binom_cdf_left(x, n, p)
        at = binom_cdf(r if snapped else math.floor(x), n, p)
        assert left <= at + 1e-15
        attained = snapped and 0 <= r <= n
        assert (left == at) == (not attained)

    def test_count_thresholds_snaps_float_noise(self):
        x = 10 * 0.7  # 7.000000000000001
        assert count_thresholds(x) == (7, 6)
        assert count_thresholds(6.5) == (6, 6)
        from fractions import Fraction
        assert count_thresholds(Fraction(7, 1)) == (7, 6)
        assert count_thresholds(Fraction(13, 2)) == (6, 6)


class TestContinuous:
    def test_normal_examples(self):
        assert normal_cdf(0.0) == 0.5
        assert normal_quantile(0.95) == pytest.approx(1.6449, abs=1e-4)
        assert normal_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert normal_cdf(1.0, 1.0, 2.0) == 0.5
        assert normal_quantile(0.5, 3.0, 2.0) == 3.0

    def test_normal_inverse_identity(self):
        x = np.linspace(-6, 0, 601)
        assert np.max(np.abs(normal_quantile(normal_cdf(x)) - x)) < 1e-9
        # for x > 0, Phi(x) is within 1e-9 of 1 where doubles are 1.1e-16 apart;
        # the round trip can only be as good as that spacing divided by the density
        x = np.linspace(0, 6, 601)
        err = np.abs(normal_quantile(normal_cdf(x)) - x)
        assert np.all(err < 1e-9 + 2.0**-53 / normal_pdf(x))

    @pytest.mark.parametrize("z", [0.0, 1.0, -0.1])
    def test_normal_quantile_domain(self, z):
        with pytest.raises(DomainError):
            normal_quantile(z)

    def test_normal_sigma_positive(self):
        with pytest.raises(DomainError):
            normal_pdf(0.0, 0.0, 0.0)

    def test_beta(self):
        assert beta_cdf(0.5, 1, 1) == pytest.approx(0.5)
        assert beta_quantile(0.5, 2, 2) == pytest.approx(0.5)
        for x in (0.1, 0.37, 0.8):
            assert beta_cdf(x, 2.5, 4) + beta_cdf(1 - x, 4, 2.5) == pytest.approx(1.0, abs=1e-14)
        with pytest.raises(DomainError):
            beta_cdf(1.5, 1, 1)
        with pytest.raises(DomainError):
            beta_quantile(1.0, 2, 2)

    def test_t_and_gamma(self):
        assert t_cdf(0.0, 7) == 0.5
        assert t_cdf(1.0, 1) == pytest.approx(0.75, abs=1e-14)
        assert math.exp(gamma_ln(2.5) - gamma_ln(2)) == pytest.approx(1.32934, abs=1e-4)
        assert t_pdf(0.0, 1) == pytest.approx(1 / math.pi)
        assert t_quantile(0.95, 4) == pytest.approx(2.131847, abs=1e-6)
        assert gamma_ln(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-12)


class TestQuadrature:
    def test_constant(self):
        assert integrate(lambda z: 1.0).value == pytest.approx(1.0, abs=1e-12)

    def test_quantile_integral_probit(self):
        r = integrate(lambda z: normal_quantile(z) * (2 * z - 1), probit=True)
        assert r.converged
        assert r.value == pytest.approx(1 / math.sqrt(math.pi), abs=1e-6)

    def test_quantile_integral_mc_oracle(self):
        rng = np.random.default_rng(11)
        z = rng.uniform(size=10**7)
        vals = normal_quantile(z) * (2 * z - 1)
        se = vals.std() / math.sqrt(vals.size)
        assert abs(vals.mean() - 1 / math.sqrt(math.pi)) < 4 * se

    @pytest.mark.parametrize("m", [1, 5, 40])
    def test_binomial_pmf_integral(self, m):
        for k in range(m + 1):
            r = integrate(lambda z: binom_pmf(k, m, 1 - z))
            assert r.value == pytest.approx(1 / (m + 1), abs=1e-9)

    def test_pieces(self):
        f = lambda x: 0.0 if x < 0.3 else 1.0  # noqa: E731
        assert integrate_pieces(f, [0.3]).value == pytest.approx(0.7, abs=1e-12)

    def test_closed_form_battery(self):
        cases = [(math.sin, 0, math.pi, 2.0), (math.exp, 0, 1, math.e - 1),
                 (lambda x: x ** 5, -1, 2, (2 ** 6 - 1) / 6)]
        for f, a, b, exact in cases:
            assert integrate(f, a, b).value == pytest.approx(exact, abs=1e-9)

    def test_non_convergence_reported(self):
        spec = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=3)
        f = lambda x: math.sin(1 / x) if x else 0.0  # noqa: E731
        with pytest.raises(IntegrationError) as info:
            integrate(f, 0.0, 1.0, spec)
        assert info.value.estimate is not None
        r = integrate(f, 0.0, 1.0, spec, strict=False)
        assert not r.converged

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(tail_cutoff=5.0)
        assert DEFAULT_QUAD.tail_cutoff == 8.5


@settings(max_examples=50)
@given(st.floats(0.001, 0.999), st.floats(0.2, 20), st.floats(0.2, 20))
def test_beta_quantile_inverts_cdf(q, a, b):
    x = beta_quantile(q, a, b)
    # one ulp in x moves the CDF by about pdf(x) * ulp(x)
    slack = 4 * np.spacing(max(x, 1 - x)) * sps.beta.pdf(min(x, 1 - 1e-16), a, b)
    assert beta_cdf(x, a, b) == pytest.approx(q, abs=1e-9 + slack)
