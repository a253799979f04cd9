"""Longitudinal bound statistics"""

from .engine import (
    BoundSummary,
    TwinSummary,
    last_agreement_index,
    last_agreement_indices,
    transformed_outcomes,
    summarize_observational,
    summarize_twin,
)

__all__ = [
    "BoundSummary",
    "TwinSummary",
    "last_agreement_index",
    "last_agreement_indices",
    "transformed_outcomes",
    "summarize_observational",
    "summarize_twin",
]
