"""Box regions B_{0:t}: per-timestep conjunctions of feature constraints"""

import math
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..data.schema import FeatureSchema
from ..errors import ValidationError


@dataclass(frozen=True)
class IntervalConstraint:
    """lo <= value < hi, or lo <= value <= hi when closed_right"""
    feature: str
    lo: float = -math.inf
    hi: float = math.inf
    closed_right: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValidationError(f"Empty interval on '{self.feature}': [{self.lo}, {self.hi}]")

    def mask(self, values: np.ndarray) -> np.ndarray:
        upper = values <= self.hi if self.closed_right else values < self.hi
        return (values >= self.lo) & upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature,
            "lo": None if math.isinf(self.lo) else self.lo,
            "hi": None if math.isinf(self.hi) else self.hi,
            "closed_right": self.closed_right,
        }


@dataclass(frozen=True)
class MembershipConstraint:
    """value in a finite set (binary and categorical features)"""
    feature: str
    values: FrozenSet[float]

    def mask(self, values: np.ndarray) -> np.ndarray:
        return np.isin(values, sorted(self.values))

    def to_dict(self) -> Dict[str, Any]:
        return {"feature": self.feature, "in": sorted(self.values)}


Constraint = Union[IntervalConstraint, MembershipConstraint]


def constraint_from_dict(data: Dict[str, Any]) -> Constraint:
    if not isinstance(data, dict) or "feature" not in data:
        raise ValidationError(f"Invalid constraint: {data!r}")
    if "in" in data:
        return MembershipConstraint(data["feature"], frozenset(float(v) for v in data["in"]))
    lo, hi = data.get("lo"), data.get("hi")
    return IntervalConstraint(
        data["feature"],
        -math.inf if lo is None else float(lo),
        math.inf if hi is None else float(hi),
        bool(data.get("closed_right", False)),
    )


@dataclass(frozen=True)
class RegionPredicate:
    """One conjunction per timestep 0..t; an empty conjunction is the whole space.

    Timestep 0 constrains X0 features, timesteps s >= 1 constrain step features.
    """
    steps: Tuple[Tuple[Constraint, ...], ...]

    @classmethod
    def whole_space(cls, t: int) -> "RegionPredicate":
        return cls(tuple(() for _ in range(t + 1)))

    @property
    def t(self) -> int:
        return len(self.steps) - 1

    def check(self, schema: FeatureSchema):
        """Raise ValidationError if a constraint names an unknown feature"""
        for s, conjunction in enumerate(self.steps):
            for c in conjunction:
                schema.feature_at(c.feature, s)

    def step_mask(self, schema: FeatureSchema, values: np.ndarray, s: int) -> np.ndarray:
        """Vectorized membership of the timestep-s conjunction; values is (n, dim)"""
        values = np.atleast_2d(values)
        mask = np.ones(len(values), dtype=bool)
        for c in self.steps[s]:
            i, _ = schema.feature_at(c.feature, s)
            mask &= c.mask(values[:, i])
        return mask

    def prefix_masks(self, schema: FeatureSchema, x0: np.ndarray, x: np.ndarray,
                     upto: Optional[int] = None) -> np.ndarray:
        """Cumulative membership: column s is X_{0:s} in B_{0:s}; shape (n, upto+1)"""
        upto = self.t if upto is None else upto
        columns = [self.step_mask(schema, x0, 0)]
        for s in range(1, upto + 1):
            columns.append(self.step_mask(schema, x[:, s - 1, :], s))
        per_step = np.stack(columns, axis=1) if len(x0) else np.ones((0, upto + 1), dtype=bool)
        return np.logical_and.accumulate(per_step, axis=1)

    def to_dict(self) -> List[List[Dict[str, Any]]]:
        return [[c.to_dict() for c in conjunction] for conjunction in self.steps]

    @classmethod
    def from_dict(cls, data: Sequence[Sequence[Dict[str, Any]]]) -> "RegionPredicate":
        if not isinstance(data, list):
            raise ValidationError("Region must be a list of per-timestep constraint lists")
        return cls(tuple(tuple(constraint_from_dict(c) for c in conjunction) for conjunction in data))


def eval_region(region: RegionPredicate, schema: FeatureSchema,
                xs: Sequence[Sequence[float]], s: int) -> bool:
    """Whether the prefix x_{0:s} lies in B_{0:s}; xs[0] is x0, xs[k] is x_k"""
    if s > region.t:
        raise ValidationError(f"Prefix length {s} exceeds region horizon {region.t}")
    if len(xs) < s + 1:
        raise ValidationError(f"Need {s + 1} observation vectors, got {len(xs)}")
    for r in range(s + 1):
        row = np.asarray(xs[r], dtype=float)[None, :]
        if not region.step_mask(schema, row, r)[0]:
            return False
    return True
