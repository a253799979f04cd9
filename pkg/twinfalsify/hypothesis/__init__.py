"""Hypothesis parameters, region predicates and hypothesis generation"""

from .region import (
    IntervalConstraint,
    MembershipConstraint,
    RegionPredicate,
    eval_region,
)
from .spec import (
    OutcomeSpec,
    HypothesisSpec,
    eval_outcome,
    load_hypotheses,
    dump_hypotheses,
)
from .generator import generate_hypotheses

__all__ = [
    "IntervalConstraint",
    "MembershipConstraint",
    "RegionPredicate",
    "eval_region",
    "OutcomeSpec",
    "HypothesisSpec",
    "eval_outcome",
    "load_hypotheses",
    "dump_hypotheses",
    "generate_hypotheses",
]
