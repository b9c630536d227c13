"""Exact coverage probability and expected length of bootstrap confidence intervals."""

from .binom_one import (IntervalTable, OneSampleDesign, area_exact, area_under, calibrate_alpha,
                        coverage_cwa, coverage_cwi, el_cwa, el_cwi, icp)
from .binom_two import (DiffPoint, OddsPoint, TwoSampleDesign, coverage_cd, coverage_ctheta, el_cd,
                        el_ctheta, surface_grid)
from .mc import exhaustive, simulate
from .nonparam import (PercentileDesign, coverage_cpm, coverage_cpn, coverage_cpn_n2, cpn_upper_bound,
                       dist_mean_boot, dist_median_boot, el_cpm, el_cpn, el_cpn_n2, s_count)
from .normal import (NormalDesign, coverage_cnu, coverage_cq, el_cn, el_cnm, el_cnu, t_interval_el,
                     z_interval_el)
from .percentile import BootstrapPlan, DiscreteDist, coverage_bracket, expected_width, make_plan
from .streams import EvalResult, McConfig, McEstimate

__all__ = [name for name in dir() if not name.startswith("_")]
