"""Hypothesis parameters (t, f, a_{1:t}, B_{0:t}, y_lo, y_up)"""

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .region import RegionPredicate
from ..data.schema import FeatureSchema
from ..errors import ValidationError

logger = logging.getLogger(__name__)

OUTCOME_KINDS = ("clip", "indicator_ge")


@dataclass(frozen=True)
class OutcomeSpec:
    """f(x_{0:t}) = clip((x_t)_i, y_lo, y_up), or 1((x_t)_i >= threshold)"""
    t: int
    feature: str
    y_lo: float
    y_up: float
    kind: str = "clip"
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.kind not in OUTCOME_KINDS:
            raise ValidationError(f"Unknown outcome kind: {self.kind}")
        if self.kind == "indicator_ge":
            if self.threshold is None:
                raise ValidationError("indicator_ge outcomes need a threshold")
            object.__setattr__(self, "y_lo", 0.0)
            object.__setattr__(self, "y_up", 1.0)
        if self.y_lo > self.y_up:
            raise ValidationError(f"y_lo {self.y_lo} exceeds y_up {self.y_up}")

    @property
    def y_range(self) -> float:
        return self.y_up - self.y_lo

    def apply(self, raw: np.ndarray) -> np.ndarray:
        """Map raw feature values to outcomes in [y_lo, y_up]"""
        raw = np.asarray(raw, dtype=float)
        if self.kind == "indicator_ge":
            return (raw >= self.threshold).astype(float)
        return np.clip(raw, self.y_lo, self.y_up)

    def raw_values(self, schema: FeatureSchema, x: np.ndarray) -> np.ndarray:
        """Raw (unclipped) values Z of the outcome feature at step t; x is (n, >=t, d)"""
        return np.asarray(x, dtype=float)[:, self.t - 1, schema.step_index(self.feature)]

    def to_dict(self) -> Dict[str, Any]:
        out = {"feature": self.feature, "y_lo": self.y_lo, "y_up": self.y_up, "kind": self.kind}
        if self.threshold is not None:
            out["threshold"] = self.threshold
        return out


def eval_outcome(outcome: OutcomeSpec, schema: FeatureSchema,
                 xs: Sequence[Sequence[float]]) -> Tuple[float, float]:
    """Evaluate f on one prefix x_{0:t}; returns (outcome, raw value)"""
    if len(xs) < outcome.t + 1:
        raise ValidationError(f"Need {outcome.t + 1} observation vectors, got {len(xs)}")
    vector = xs[outcome.t]
    if len(vector) != schema.step_dim:
        raise ValidationError(f"Expected {schema.step_dim} step values, got {len(vector)}")
    raw = float(vector[schema.step_index(outcome.feature)])
    return float(outcome.apply(np.array([raw]))[0]), raw


@dataclass(frozen=True)
class HypothesisSpec:
    """Parameters of one H_lo / H_up pair"""
    t: int
    actions: Tuple[int, ...]
    region: RegionPredicate
    outcome: OutcomeSpec
    label: str = ""
    spec_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if self.t < 1:
            raise ValidationError(f"Hypothesis timestep must be >= 1, got {self.t}")
        if len(self.actions) != self.t:
            raise ValidationError(f"Expected {self.t} actions, got {len(self.actions)}")
        if self.outcome.t != self.t:
            raise ValidationError(f"Outcome timestep {self.outcome.t} differs from {self.t}")
        if self.region.t != self.t:
            raise ValidationError(f"Region covers {self.region.t + 1} timesteps, need {self.t + 1}")

    @property
    def degenerate(self) -> bool:
        """y_lo == y_up: both bounds collapse, nothing to test"""
        return self.outcome.y_lo == self.outcome.y_up

    def check(self, schema: FeatureSchema):
        if self.t > schema.horizon:
            raise ValidationError(f"{self.spec_id}: timestep {self.t} exceeds horizon {schema.horizon}")
        for s, a in enumerate(self.actions):
            if not 0 <= a < schema.action_cardinalities[s]:
                raise ValidationError(f"{self.spec_id}: action {a} out of range at step {s + 1}")
        self.region.check(schema)
        schema.step_index(self.outcome.feature)

    def with_interval(self, y_lo: float, y_up: float) -> "HypothesisSpec":
        return replace(self, outcome=replace(self.outcome, y_lo=y_lo, y_up=y_up))

    def truncated(self, s: int) -> "HypothesisSpec":
        """Same actions, region and outcome feature cut back to timestep s"""
        if not 1 <= s <= self.t:
            raise ValidationError(f"Cannot truncate a t={self.t} hypothesis to t={s}")
        if s == self.t:
            return self
        return replace(
            self,
            t=s,
            actions=self.actions[:s],
            region=RegionPredicate(self.region.steps[:s + 1]),
            outcome=replace(self.outcome, t=s),
            spec_id=f"{self.spec_id}@t{s}",
        )

    def key(self) -> str:
        """Canonical content key (ignores id)"""
        data = self.to_dict()
        data.pop("id")
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.spec_id,
            "label": self.label,
            "t": self.t,
            "actions": list(self.actions),
            "region": self.region.to_dict(),
            "outcome": self.outcome.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HypothesisSpec":
        try:
            t = int(data["t"])
            out = data["outcome"]
            outcome = OutcomeSpec(
                t, out["feature"], float(out.get("y_lo", 0.0)), float(out.get("y_up", 1.0)),
                out.get("kind", "clip"), out.get("threshold"),
            )
            return cls(
                t=t,
                actions=tuple(data["actions"]),
                region=RegionPredicate.from_dict(data["region"]),
                outcome=outcome,
                label=data.get("label", out["feature"]),
                spec_id=str(data.get("id", "")),
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Invalid hypothesis spec: {e}")


def load_hypotheses(path: str, schema: Optional[FeatureSchema] = None) -> List[HypothesisSpec]:
    """Read a JSON array of hypothesis specs"""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError(f"Hypothesis file not found: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"Invalid hypothesis JSON in {path}: {e}")
    if not isinstance(data, list):
        raise ValidationError("Hypothesis file must contain a JSON array")
    specs = []
    for i, entry in enumerate(data):
        spec = HypothesisSpec.from_dict(entry)
        if not spec.spec_id:
            spec = replace(spec, spec_id=f"H{i:05d}")
        if schema is not None:
            spec.check(schema)
        specs.append(spec)
    ids = [s.spec_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValidationError("Duplicate hypothesis ids")
    logger.info(f"Loaded {len(specs)} hypotheses from {path}")
    return specs


def dump_hypotheses(specs: Sequence[HypothesisSpec], path: str):
    Path(path).write_text(json.dumps([s.to_dict() for s in specs], indent=1) + "\n", encoding="utf-8")
