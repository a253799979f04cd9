"""Assessment pipeline, reports, longitudinal comparison and sensitivity sweep"""

from .report import AssessmentReport, quantity_table
from .runtime import AssessmentState, Runtime, apply_holm, derive_seed, load_world, run_tests
from .longitudinal import longitudinal_comparison, prefix_family
from .sweep import sensitivity_sweep, sweep_assessment

__all__ = [
    "AssessmentReport",
    "quantity_table",
    "AssessmentState",
    "Runtime",
    "apply_holm",
    "derive_seed",
    "load_world",
    "run_tests",
    "longitudinal_comparison",
    "prefix_family",
    "sensitivity_sweep",
    "sweep_assessment",
]
