"""Hypothesis tests: Hoeffding, bootstrap and Holm-Bonferroni"""

from .hoeffding import (
    ALPHA_GRID,
    hoeffding_margin,
    hoeffding_bounds,
    p_value_hoeffding_lo,
    p_value_hoeffding_up,
    grid_p_values,
)
from .bootstrap import bootstrap_bound, bootstrap_p_values, resample_means
from .multiplicity import MultiplicityResult, holm_bonferroni
from .diagnostics import interval_length_ratio, unclipped_diagnostics
from .falsification import (
    TestOutcome,
    test_hypothesis,
    TESTED,
    SKIPPED_ANTECEDENT,
    SKIPPED_DEGENERATE,
    SKIPPED_MIN_N,
)

__all__ = [
    "ALPHA_GRID",
    "hoeffding_margin",
    "hoeffding_bounds",
    "p_value_hoeffding_lo",
    "p_value_hoeffding_up",
    "grid_p_values",
    "bootstrap_bound",
    "bootstrap_p_values",
    "resample_means",
    "MultiplicityResult",
    "holm_bonferroni",
    "interval_length_ratio",
    "unclipped_diagnostics",
    "TestOutcome",
    "test_hypothesis",
    "TESTED",
    "SKIPPED_ANTECEDENT",
    "SKIPPED_DEGENERATE",
    "SKIPPED_MIN_N",
]
