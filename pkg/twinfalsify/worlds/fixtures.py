"""Shipped worlds"""

from pathlib import Path
from typing import List

from .world import DiscreteWorld
from ..data.schema import Feature, FeatureKind
from ..errors import ValidationError

FIXTURE_DIR = Path(__file__).parent / "fixtures"

GENTLE, AGGRESSIVE = 0, 1
NEW_PADS, OLD_PADS = 0, 1


def brake_pad_world(p_aggressive_new: float = 0.9, p_aggressive_old: float = 0.1) -> DiscreteWorld:
    """One-step braking example with the pad condition as hidden confounder.

    Drivers with new pads brake aggressively more often; aggressive braking
    stops the car with new pads and fails with old ones, gentle braking
    stops it half of the time either way. With the defaults the naive
    observational mean under aggressive braking is 0.9 while the
    interventional mean is 0.5.
    """
    return DiscreteWorld(
        name="brake_pad",
        confounder_probs=[0.5, 0.5],
        x0_features=[],
        step_features=[Feature("stopped", FeatureKind.BINARY)],
        outcome_feature="stopped",
        x0_values=[[]],
        x0_table=[[1.0], [1.0]],
        action_cardinalities=[2],
        obs_values=[[[0.0], [1.0]]],
        policy=[[[[1.0 - p_aggressive_new, p_aggressive_new]],
                 [[1.0 - p_aggressive_old, p_aggressive_old]]]],
        dynamics=[[[[[0.5, 0.5], [0.0, 1.0]]],
                   [[[0.5, 0.5], [1.0, 0.0]]]]],
        labels={"confounder": ["new pads", "old pads"], "actions": [["gentle", "aggressive"]]},
    )


def available_fixtures() -> List[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.json"))


def load_fixture(name: str) -> DiscreteWorld:
    path = FIXTURE_DIR / f"{name}.json"
    if not path.exists():
        raise ValidationError(f"Unknown world fixture '{name}'; available: {available_fixtures()}")
    return DiscreteWorld.from_file(str(path))


def confounded_world() -> DiscreteWorld:
    """Two steps, confounder driving both actions and outcomes"""
    return load_fixture("confounded_two_step")


def deterministic_world() -> DiscreteWorld:
    """Two steps with X_s = X_{s-1} xor A_s; confounded policy, unconfounded outcomes"""
    return load_fixture("deterministic_two_step")
