from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bootcover.binom_one import (IntervalTable, OneSampleDesign, agresti_coull_table, area_exact,
                                 area_under, calibrate_alpha, clopper_pearson_table, coverage_cwa,
                                 coverage_cwi, coverage_table, el_area_exact, el_cwa, el_cwi, el_table,
                                 icp, wald_table, wilson_coeffs, wilson_table)
from bootcover.mc import exhaustive, simulate
from bootcover.stats import DomainError, binom_pmf, normal_quantile
from bootcover.streams import McConfig


def wa(n, m, a):
    return OneSampleDesign.build(n, m, a, "wald")


def wi(n, m, a):
    return OneSampleDesign.build(n, m, a, "wilson")


class TestWilsonCoeffs:
    def test_example(self):
        c = wilson_coeffs(10, 0.1)
        assert c.a1 == pytest.approx(0.078706, abs=1e-6)
        assert c.b1 == pytest.approx(0.106471, abs=1e-6)

    @given(st.integers(1, 10_000), st.floats(0.001, 0.999))
    def test_identities(self, n, alpha):
        c = wilson_coeffs(n, alpha)
        assert c.a1 * n + 2 * c.b1 == pytest.approx(1.0, abs=1e-12)
        assert c.b1 / c.a1 == pytest.approx(c.z ** 2 / 2, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            wilson_coeffs(0, 0.1)


class TestCoverageCwa:
    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_endpoints(self, p):
        assert coverage_cwa(p, wa(10, 100, 0.1)) == pytest.approx(1.0, abs=1e-15)

    def test_exhaustive_small(self):
        d = wa(2, 2, 0.5)
        ref = exhaustive(d, 0.5)
        assert coverage_cwa(0.5, d) == pytest.approx(ref.coverage, abs=1e-12)
        assert el_cwa(0.5, d) == pytest.approx(ref.el, abs=1e-12)

    def test_rational_and_float_grid_agree(self):
        d = wa(10, 100, 0.1)
        for k in range(11):
            assert coverage_cwa(Fraction(k, 10), d) == coverage_cwa(k / 10, d)

    def test_wrong_center(self):
        with pytest.raises(ValueError):
            coverage_cwa(0.3, wi(5, 10, 0.2))

    @given(st.floats(1e-9, 1 - 1e-9), st.integers(1, 40))
    def test_icp_bound(self, p, n):
        assert coverage_cwa(p, wa(n, 20, 0.2)) <= 1 - (1 - p) ** n + 1e-12

    # stays outside the 1e-12 band where float p snaps onto the endpoints
    @given(st.one_of(st.floats(1e-9, 1 - 1e-9), st.sampled_from([0.0, 1.0])))
    def test_symmetry(self, p):
        d = wa(7, 30, 0.1)
        assert coverage_cwa(p, d) == pytest.approx(coverage_cwa(1 - p, d), abs=1e-12)


class TestCoverageCwi:
    def test_y0_term_vanishes_below_b1(self):
        d = wi(10, 100, 0.1)
        p = d.coeffs.b1 / 2
        assert d.brackets(p)[0] == 0.0

    def test_attained_point_against_enumeration(self):
        d = wi(2, 2, 0.5)
        for k in range(3):
            p = d.coeffs.b1 + d.coeffs.a1 * k
            ref = exhaustive(d, p)
            assert coverage_cwi(p, d) == pytest.approx(ref.coverage, abs=1e-12)
            assert el_cwi(p, d) == pytest.approx(ref.el, abs=1e-12)

    def test_area_reference_value(self):
        d = wi(10, 100, 0.1)
        assert area_under(d.coverage, d.breakpoints()) == pytest.approx(0.6625, abs=0.002)

    @given(st.floats(1e-9, 1.0))
    def test_icp_bound_below_b1(self, u):
        d = wi(10, 50, 0.1)
        p = u * d.coeffs.b1 * (1 - 1e-9)
        assert coverage_cwi(p, d) <= 1 - (1 - p) ** 10 + 1e-12


class TestExpectedLength:
    @pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 1.0])
    def test_n1_degenerate(self, p):
        assert el_cwa(p, wa(1, 10, 0.2)) == 0.0

    def test_n1_wilson_not_degenerate(self):
        # the Wilson centre is b1 or 1 - b1, strictly inside (0, 1), so resampling still varies
        d = wi(1, 4, 0.4)
        for p in (0.0, 0.3, 1.0):
            assert el_cwi(p, d) == pytest.approx(exhaustive(d, p).el, abs=1e-12)
            assert el_cwi(p, d) > 0.3

    def test_p0(self):
        assert el_cwa(0.0, wa(8, 30, 0.1)) == 0.0

    def test_simulation_oracle(self):
        d = wa(5, 10, 0.2)
        est = simulate(d, 0.3, McConfig(100_000, 17, 4))
        assert abs(est.z_coverage(coverage_cwa(0.3, d))) <= 3
        assert abs(est.z_el(el_cwa(0.3, d))) <= 3


class TestTables:
    def test_wald_el_closed_form(self):
        n, a = 12, 0.1
        t = wald_table(n, a)
        z = normal_quantile(1 - a / 2)
        ph = np.arange(n + 1) / n
        expected = np.sum(2 * z * np.sqrt(ph * (1 - ph) / n) * binom_pmf(np.arange(n + 1), n, 0.5))
        assert el_table(0.5, t) == pytest.approx(expected, abs=1e-14)

    def test_clopper_pearson_exact(self):
        t = clopper_pearson_table(10, 0.1)
        for p in np.linspace(0.05, 0.95, 19):
            assert coverage_table(p, t) >= 0.9 - 1e-12

    def test_degenerate_table(self):
        t = IntervalTable(6, np.zeros(7), np.ones(7))
        assert coverage_table(0.37, t) == pytest.approx(1.0)
        assert el_table(0.37, t) == pytest.approx(1.0)

    def test_builders_ordered(self):
        for build in (wald_table, wilson_table, agresti_coull_table, clopper_pearson_table):
            t = build(15, 0.05)
            assert np.all(t.lower <= t.upper)

    def test_missing_rows(self):
        with pytest.raises(ValueError, match=r"missing y.*\b2\b"):
            IntervalTable.from_rows([(0, 0, 0.5), (1, 0.1, 0.9), (3, 0.5, 1)], n=3)

    def test_csv_round_trip(self, tmp_path):
        t = wilson_table(9, 0.1)
        path = tmp_path / "wilson.csv"
        t.write_csv(path)
        assert path.read_text().splitlines()[0] == "y,lower,upper"
        back = IntervalTable.read_csv(path)
        assert np.array_equal(back.lower, t.lower) and np.array_equal(back.upper, t.upper)

    def test_csv_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,lo,hi\n0,0,1\n")
        with pytest.raises(ValueError, match="header"):
            IntervalTable.read_csv(path)


class TestArea:
    def test_constant(self):
        assert area_under(lambda p: 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_area_large_m(self):
        d = wi(30, 10_000, 0.1)
        assert area_under(d.coverage, d.breakpoints()) == pytest.approx(0.7862, abs=0.002)

    @pytest.mark.parametrize("center", ["wald", "wilson"])
    def test_exact_route_matches_quadrature(self, center):
        d = OneSampleDesign.build(9, 40, 0.1, center)
        assert area_exact(d) == pytest.approx(area_under(d.coverage, d.breakpoints()), abs=1e-10)
        assert el_area_exact(d) == pytest.approx(area_under(d.expected_length, d.breakpoints()), abs=1e-10)

    def test_exact_route_for_tables(self):
        t = clopper_pearson_table(8, 0.1)
        assert area_exact(t) == pytest.approx(area_under(t.coverage, t.breakpoints()), abs=1e-10)

    def test_row_non_monotone(self):
        a = [area_exact(wi(10, 100, alpha)) for alpha in (0.2, 0.1, 0.05)]
        assert a[0] > a[1] > a[2]


class TestIcp:
    def test_cwa_zero(self):
        n = 10
        d = wa(n, 100, 0.1)
        r = icp(d.coverage, d.breakpoints(), n_for_bound=n)
        assert r.value <= 1 - (1 - 1e-8) ** n
        assert r.smallest_probe <= 1e-8
        assert r.analytic_bound == pytest.approx(1 - (1 - r.smallest_probe) ** n)
        assert "infimum is 0" in r.note

    def test_constant(self):
        assert icp(lambda p: 0.42).value == 0.42

    def test_clopper_pearson(self):
        t = clopper_pearson_table(10, 0.1)
        assert icp(t.coverage, t.breakpoints(), grid=500).value >= 0.9 - 1e-12


class TestCalibrate:
    def test_wald_area_matched(self):
        target = area_exact(wi(10, 100, 0.1))
        cal = calibrate_alpha(lambda a: area_exact(wald_table(10, a)), target)
        assert cal.level == pytest.approx(0.7942, abs=0.02)
        assert not cal.flagged

    def test_constant_family(self):
        cal = calibrate_alpha(lambda a: 1 - a, 0.6625)
        assert cal.level == pytest.approx(0.6625, abs=1e-9)

    def test_fixed_point(self):
        target = area_exact(wa(10, 100, 0.1))
        cal = calibrate_alpha(lambda a: area_exact(wa(10, 100, a)), target)
        # bootstrap areas are step functions of alpha; 0.1 must lie on the returned plateau
        assert area_exact(wa(10, 100, cal.alpha)) == pytest.approx(target, abs=1e-12)
        assert cal.residual == pytest.approx(0.0, abs=1e-12)

    def test_flag(self):
        cal = calibrate_alpha(lambda a: 0.5 + 0 * a, 0.9, tol=0.005)
        assert cal.flagged

    def test_target_range(self):
        with pytest.raises(ValueError):
            calibrate_alpha(lambda a: a, 1.5)
