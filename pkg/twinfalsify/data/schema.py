"""Feature schema shared by observational and twin trajectories"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..errors import ValidationError


class FeatureKind(Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Feature:
    """One named coordinate of an observation vector"""
    name: str
    kind: FeatureKind = FeatureKind.CONTINUOUS
    cardinality: Optional[int] = None

    def __post_init__(self):
        if self.kind is FeatureKind.CATEGORICAL:
            if self.cardinality is None or self.cardinality < 1:
                raise ValidationError(f"Categorical feature '{self.name}' needs a positive cardinality")
        elif self.kind is FeatureKind.BINARY:
            object.__setattr__(self, "cardinality", 2)

    @property
    def discrete(self) -> bool:
        return self.kind is not FeatureKind.CONTINUOUS

    def accepts(self, value: float) -> bool:
        """Whether a value is admissible for this feature"""
        if not self.discrete:
            return True
        return float(value).is_integer() and 0 <= value < self.cardinality

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Feature":
        if not isinstance(data, dict) or "name" not in data:
            raise ValidationError(f"Invalid feature entry: {data!r}")
        kind = data.get("kind", "continuous")
        try:
            kind = FeatureKind(kind)
        except ValueError:
            raise ValidationError(f"Unknown feature kind '{kind}' for '{data['name']}'")
        return cls(name=data["name"], kind=kind, cardinality=data.get("cardinality"))

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name, "kind": self.kind.value}
        if self.kind is FeatureKind.CATEGORICAL:
            out["cardinality"] = self.cardinality
        return out


@dataclass(frozen=True)
class FeatureSchema:
    """Fixed horizon T, feature lists and finite action spaces"""
    horizon: int
    x0_features: Tuple[Feature, ...]
    step_features: Tuple[Feature, ...]
    action_cardinalities: Tuple[int, ...]
    _x0_index: Dict[str, int] = field(default=None, init=False, repr=False, compare=False)
    _step_index: Dict[str, int] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x0_features", tuple(self.x0_features))
        object.__setattr__(self, "step_features", tuple(self.step_features))
        object.__setattr__(self, "action_cardinalities", tuple(int(k) for k in self.action_cardinalities))
        if self.horizon < 1:
            raise ValidationError(f"Horizon must be at least 1, got {self.horizon}")
        if len(self.action_cardinalities) != self.horizon:
            raise ValidationError(
                f"Expected {self.horizon} action cardinalities, got {len(self.action_cardinalities)}"
            )
        if any(k < 1 for k in self.action_cardinalities):
            raise ValidationError("Every action space needs at least one action")
        for label, features in (("x0_features", self.x0_features), ("step_features", self.step_features)):
            names = [f.name for f in features]
            if len(set(names)) != len(names):
                raise ValidationError(f"Duplicate feature names in {label}: {names}")
        object.__setattr__(self, "_x0_index", {f.name: i for i, f in enumerate(self.x0_features)})
        object.__setattr__(self, "_step_index", {f.name: i for i, f in enumerate(self.step_features)})

    @property
    def x0_dim(self) -> int:
        return len(self.x0_features)

    @property
    def step_dim(self) -> int:
        return len(self.step_features)

    def x0_index(self, name: str) -> int:
        if name not in self._x0_index:
            raise ValidationError(f"Unknown x0 feature: {name}")
        return self._x0_index[name]

    def step_index(self, name: str) -> int:
        if name not in self._step_index:
            raise ValidationError(f"Unknown step feature: {name}")
        return self._step_index[name]

    def feature_at(self, name: str, s: int) -> Tuple[int, Feature]:
        """Resolve a feature name at timestep s (0 means X0)"""
        if s == 0:
            i = self.x0_index(name)
            return i, self.x0_features[i]
        i = self.step_index(name)
        return i, self.step_features[i]

    def has_feature_at(self, name: str, s: int) -> bool:
        return name in (self._x0_index if s == 0 else self._step_index)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureSchema":
        try:
            return cls(
                horizon=int(data["T"]),
                x0_features=[Feature.from_dict(f) for f in data.get("x0_features", [])],
                step_features=[Feature.from_dict(f) for f in data.get("step_features", [])],
                action_cardinalities=data["action_cardinalities"],
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Invalid schema manifest: {e}")

    @classmethod
    def from_file(cls, path: str) -> "FeatureSchema":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"Schema file not found: {path}")
        except json.JSONDecodeError as e:
            raise ValidationError(f"Invalid schema JSON in {path}: {e}")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "T": self.horizon,
            "x0_features": [f.to_dict() for f in self.x0_features],
            "step_features": [f.to_dict() for f in self.step_features],
            "action_cardinalities": list(self.action_cardinalities),
        }

    def truncated(self, t: int) -> "FeatureSchema":
        """Same features over horizon t <= T"""
        if not 1 <= t <= self.horizon:
            raise ValidationError(f"Cannot truncate horizon {self.horizon} to {t}")
        return FeatureSchema(t, self.x0_features, self.step_features, self.action_cardinalities[:t])

    def relaxed(self) -> "FeatureSchema":
        """Same schema with every step feature read as continuous.

        Twin outputs are simulated values, not observations: a shifted or
        external twin may place a binary outcome at 0.3. Only the x0 part
        must stay on the observed atoms.
        """
        return FeatureSchema(self.horizon, self.x0_features, [Feature(f.name) for f in self.step_features],
                             self.action_cardinalities)

    def with_action_cardinalities(self, cardinalities: List[int]) -> "FeatureSchema":
        return FeatureSchema(self.horizon, self.x0_features, self.step_features, cardinalities)
