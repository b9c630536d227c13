import numpy as np
import pytest

from bootcover.binom_one import OneSampleDesign, coverage_cwa, coverage_cwi, el_cwa
from bootcover.binom_two import DiffPoint, OddsPoint, TwoSampleDesign, coverage_cd, el_cd
from bootcover.mc import exhaustive, simulate
from bootcover.nonparam import PercentileDesign, coverage_cpm, el_cpm
from bootcover.normal import NormalDesign, coverage_cq
from bootcover.percentile import make_plan
from bootcover.stats import DomainError
from bootcover.streams import Accumulator, McConfig, chunks
from bootcover.validate import EXACT_OPERATIONS, REGISTRY, run_suite, uncovered


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            McConfig(99)
        with pytest.raises(ValueError):
            McConfig(1000, -1)
        with pytest.raises(ValueError):
            McConfig(1000, 1, 0)

    def test_blocks_cover_reps(self):
        cfg = McConfig(1003, 9, 4)
        sizes = [size for _, _, size in cfg.blocks()]
        assert sum(sizes) == 1003 and len(sizes) == 4

    def test_streams_are_independent_of_count(self):
        # stream s draws the same numbers whatever the total number of streams
        a = next(iter(McConfig(1000, 5, 2).blocks()))[1].random(5)
        b = next(iter(McConfig(1000, 5, 7).blocks()))[1].random(5)
        assert np.array_equal(a, b)

    def test_chunks(self):
        assert list(chunks(10, 4)) == [4, 4, 2]
        assert list(chunks(3, 0)) == [1, 1, 1]

    def test_accumulator_se(self):
        acc = Accumulator()
        acc.add(np.array([1.0, 0.0, 1.0, 1.0]), np.array([2.0, 2.0, 2.0, 2.0]))
        est = acc.estimate()
        assert est.coverage_hat == 0.75
        assert est.coverage_se == pytest.approx(np.sqrt(0.75 * 0.25 / 3))
        assert est.el_hat == 2.0 and est.el_se == 0.0


class TestSimulate:
    def test_p_zero(self):
        est = simulate(OneSampleDesign.build(10, 20, 0.1, "wald"), 0.0, McConfig(1000, 1, 2))
        assert est.coverage_hat == 1.0 and est.el_hat == 0.0

    def test_deterministic(self):
        d = OneSampleDesign.build(6, 15, 0.2, "wilson")
        cfg = McConfig(20_000, 123, 3)
        assert simulate(d, 0.3, cfg) == simulate(d, 0.3, cfg)

    def test_seed_changes_by_se(self):
        d = OneSampleDesign.build(6, 15, 0.2, "wilson")
        a = simulate(d, 0.3, McConfig(50_000, 1, 3))
        b = simulate(d, 0.3, McConfig(50_000, 2, 3))
        assert a != b
        assert abs(a.coverage_hat - b.coverage_hat) <= 4 * np.hypot(a.coverage_se, b.coverage_se)

    def test_normal_constant_coverage(self):
        plan = make_plan(20, 0.2)
        est = simulate(NormalDesign(5, plan), 0.0, McConfig(100_000, 3, 4))
        assert abs(est.z_coverage(float(coverage_cq(plan)))) <= 3

    def test_one_sample_wilson(self):
        d = OneSampleDesign.build(8, 20, 0.1, "wilson")
        est = simulate(d, 0.15, McConfig(100_000, 4, 4))
        assert abs(est.z_coverage(coverage_cwi(0.15, d))) <= 3

    def test_percentile_median(self):
        d = PercentileDesign(5, make_plan(20, 0.2), "median", "uniform", 2.0)
        est = simulate(d, 1.5, McConfig(100_000, 5, 4))
        assert abs(est.z_coverage(coverage_cpm(5, 20, 0.2))) <= 3
        assert abs(est.z_el(el_cpm(5, 20, 0.2, ("uniform", 2.0)))) <= 3

    def test_domain(self):
        with pytest.raises(DomainError):
            simulate(OneSampleDesign.build(5, 10, 0.2, "wald"), 1.5, McConfig(100, 1, 1))
        with pytest.raises(TypeError):
            simulate(object(), 0.5, McConfig(100, 1, 1))


class TestExhaustive:
    def test_one_sample(self):
        d = OneSampleDesign.build(2, 2, 0.5, "wald")
        ref = exhaustive(d, 0.5)
        assert ref.coverage == pytest.approx(coverage_cwa(0.5, d), abs=1e-12)
        assert ref.el == pytest.approx(el_cwa(0.5, d), abs=1e-12)

    def test_two_sample(self):
        d = TwoSampleDesign.build(2, 2, 5, 0.2)
        pt = DiffPoint(0.0, 0.5)
        ref = exhaustive(d, pt)
        assert ref.coverage == pytest.approx(coverage_cd(pt, d), abs=1e-12)
        assert ref.el == pytest.approx(el_cd(pt, d), abs=1e-12)

    def test_point_mass(self):
        assert exhaustive(OneSampleDesign.build(3, 4, 0.5, "wald"), 1.0).coverage == 1.0
        assert exhaustive(TwoSampleDesign.build(2, 1, 3, 0.5), DiffPoint(1.0, 0.0)).coverage == 1.0
        # a degenerate sample does not make the odds-ratio estimate hit theta: Gart shrinks toward 1
        assert exhaustive(TwoSampleDesign.build(2, 1, 3, 0.5), OddsPoint(5.0, 0.0)).coverage == 0.0

    def test_cap(self):
        with pytest.raises(ValueError, match="cap"):
            exhaustive(OneSampleDesign.build(10, 20, 0.1, "wald"), 0.3)

    def test_unsupported(self):
        with pytest.raises(TypeError):
            exhaustive(NormalDesign(3, make_plan(10, 0.2)), 0.0)


class TestRegistry:
    def test_every_exact_operation_paired(self):
        assert uncovered() == []
        modules = {p.module for p in REGISTRY}
        assert set(EXACT_OPERATIONS) <= modules

    def test_quick_suite_passes(self):
        report = run_suite("quick", seed=7)
        assert report.passed, [(c.pair, c.label, c.score) for c in report.failures()]
        kinds = {c.kind for c in report.checks}
        assert kinds == {"enum", "mc"}

    def test_module_filter(self):
        report = run_suite("quick", only="nonparam-percentile")
        assert report.checks and report.passed
        with pytest.raises(ValueError):
            run_suite("quick", only="nope")
