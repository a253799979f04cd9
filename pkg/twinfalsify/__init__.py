"""
twinfalsify - falsifying digital twins against confounded observational data

Twin predictions are compared with causal bounds that the observational
data identify without assuming unconfoundedness. Any rejection certifies
a concrete failure of the twin.
"""

__version__ = "0.1.0"

from .config import AssessmentConfig
from .errors import StageError, TwinError, TwinFalsifyError, ValidationError
from .runtime import AssessmentReport, Runtime, longitudinal_comparison, sensitivity_sweep

__all__ = [
    "AssessmentConfig",
    "StageError",
    "TwinError",
    "TwinFalsifyError",
    "ValidationError",
    "AssessmentReport",
    "Runtime",
    "longitudinal_comparison",
    "sensitivity_sweep",
]
