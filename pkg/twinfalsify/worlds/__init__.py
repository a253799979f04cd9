"""Enumerable synthetic worlds and exact oracles"""

from .world import DiscreteWorld, sample_observational
from .oracle import (
    OracleBounds,
    exact_bounds_oracle,
    interventional_mean,
    observational_conditional_mean,
)
from .constructions import nonidentifiability_pair, random_world, random_spec, world_spec
from .fixtures import (
    brake_pad_world,
    confounded_world,
    deterministic_world,
    load_fixture,
    available_fixtures,
)

__all__ = [
    "DiscreteWorld",
    "sample_observational",
    "OracleBounds",
    "exact_bounds_oracle",
    "interventional_mean",
    "observational_conditional_mean",
    "nonidentifiability_pair",
    "random_world",
    "random_spec",
    "world_spec",
    "brake_pad_world",
    "confounded_world",
    "deterministic_world",
    "load_fixture",
    "available_fixtures",
]
