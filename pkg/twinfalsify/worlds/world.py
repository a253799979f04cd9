"""Enumerable potential-outcome worlds with an unobserved confounder U.

Tables are numpy arrays indexed by the history, with U first:

    x0_table      (K, n0)                          P(X0 | U)
    policy[s]     (K, n0, A1, n1, ..., A_s)          P(A_s | U, history)
    dynamics[s]   (K, n0, A1, n1, ..., A_s, n_s)     P(X_s(a_{1:s}) | U, history)

where n_s is the number of observation atoms at step s. Given U, the
factual process follows the same dynamics as every intervention, so
actions are randomized given (U, observed history) only.

``overrides`` maps a target action sequence a_{1:t} to fixed observation
atoms (x*_1, ..., x*_t): under a_{1:t}, a unit keeps its factual outcomes
up to its last agreement index N and takes x*_s for s > N. This changes
no observational quantity.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..data.dataset import TrajectoryDataset
from ..data.schema import Feature, FeatureSchema
from ..errors import PositivityError, ValidationError

logger = logging.getLogger(__name__)

MAX_HORIZON = 3
MAX_ATOMS = 1_000_000
ROW_TOLERANCE = 1e-12


@dataclass(eq=False)
class DiscreteWorld:
    name: str
    confounder_probs: np.ndarray
    x0_features: Tuple[Feature, ...]
    step_features: Tuple[Feature, ...]
    outcome_feature: str
    x0_values: np.ndarray
    x0_table: np.ndarray
    action_cardinalities: Tuple[int, ...]
    obs_values: Tuple[np.ndarray, ...]
    policy: Tuple[np.ndarray, ...]
    dynamics: Tuple[np.ndarray, ...]
    overrides: Dict[Tuple[int, ...], Tuple[int, ...]] = field(default_factory=dict)
    labels: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.confounder_probs = np.asarray(self.confounder_probs, dtype=float)
        self.x0_features = tuple(self.x0_features)
        self.step_features = tuple(self.step_features)
        self.action_cardinalities = tuple(int(k) for k in self.action_cardinalities)
        t = len(self.action_cardinalities)
        if not 1 <= t <= MAX_HORIZON:
            raise ValidationError(f"World horizon must lie in 1..{MAX_HORIZON}, got {t}")
        if len(self.obs_values) != t or len(self.policy) != t or len(self.dynamics) != t:
            raise ValidationError("obs_values, policy and dynamics need one entry per step")

        self.x0_values = np.asarray(self.x0_values, dtype=float).reshape(len(self.x0_values), len(self.x0_features))
        self.obs_values = tuple(
            np.asarray(v, dtype=float).reshape(len(v), len(self.step_features)) for v in self.obs_values
        )
        K, n0 = len(self.confounder_probs), len(self.x0_values)
        self.x0_table = self._expand(self.x0_table, (K, n0), "x0_table")

        policy, dynamics = [], []
        history = (K, n0)
        for s in range(t):
            history = history + (self.action_cardinalities[s],)
            policy.append(self._expand(self.policy[s], history, f"policy[{s + 1}]"))
            history = history + (len(self.obs_values[s]),)
            dynamics.append(self._expand(self.dynamics[s], history, f"dynamics[{s + 1}]"))
        self.policy = tuple(policy)
        self.dynamics = tuple(dynamics)

        atoms = int(np.prod(history))
        if atoms > MAX_ATOMS:
            raise ValidationError(f"World '{self.name}' has {atoms} atoms, more than {MAX_ATOMS}")
        self._check_rows(self.confounder_probs, "confounder_probs")
        self._check_rows(self.x0_table, "x0_table")
        for s in range(t):
            self._check_rows(self.policy[s], f"policy[{s + 1}]")
            self._check_rows(self.dynamics[s], f"dynamics[{s + 1}]")

        self.overrides = {tuple(a): tuple(x) for a, x in self.overrides.items()}
        for target, atoms_star in self.overrides.items():
            if len(target) != len(atoms_star) or len(target) > t:
                raise ValidationError(f"Override for {target} needs one atom per step")
        self.schema.step_index(self.outcome_feature)

    @staticmethod
    def _expand(table, shape: Tuple[int, ...], label: str) -> np.ndarray:
        array = np.asarray(table, dtype=float)
        if array.ndim != len(shape):
            raise ValidationError(f"{label}: expected {len(shape)} dimensions, got {array.ndim}")
        try:
            return np.ascontiguousarray(np.broadcast_to(array, shape))
        except ValueError:
            raise ValidationError(f"{label}: shape {array.shape} does not broadcast to {shape}")

    @staticmethod
    def _check_rows(table: np.ndarray, label: str):
        if np.any(table < 0):
            raise ValidationError(f"{label}: negative probabilities")
        if np.max(np.abs(table.sum(axis=-1) - 1.0)) > ROW_TOLERANCE:
            raise ValidationError(f"{label}: rows do not sum to 1")

    @property
    def horizon(self) -> int:
        return len(self.action_cardinalities)

    @property
    def schema(self) -> FeatureSchema:
        return FeatureSchema(self.horizon, self.x0_features, self.step_features, self.action_cardinalities)

    @property
    def outcome_index(self) -> int:
        return [f.name for f in self.step_features].index(self.outcome_feature)

    def factual_joint(self) -> np.ndarray:
        """P(U, X0, A1, X1, ..., A_t, X_t)"""
        joint = self.confounder_probs[:, None] * self.x0_table
        for policy, dynamics in zip(self.policy, self.dynamics):
            joint = joint[..., None] * policy
            joint = joint[..., None] * dynamics
        return joint

    def observational_law(self) -> np.ndarray:
        """P(X0, A1, X1, ..., A_t, X_t), the confounder marginalized out"""
        return self.factual_joint().sum(axis=0)

    def posterior(self, x0_index: int) -> np.ndarray:
        """P(U | X0)"""
        mass = self.confounder_probs * self.x0_table[:, x0_index]
        if mass.sum() <= 0:
            raise PositivityError(f"X0 atom {x0_index} has zero probability")
        return mass / mass.sum()

    def _override_for(self, actions: Tuple[int, ...]) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        for target, atoms_star in self.overrides.items():
            if target[:len(actions)] == actions:
                return target[:len(actions)], atoms_star[:len(actions)]
        clashing = [list(target) for target in self.overrides if target[0] == actions[0]]
        if clashing:
            raise ValidationError(
                f"World '{self.name}' fixes potential outcomes only under prefixes of {clashing}"
            )
        return None

    def interventional_joint(self, actions: Sequence[int]) -> np.ndarray:
        """P(U, X0, X1(a_1), ..., X_t(a_{1:t})) for t = len(actions)"""
        actions = tuple(int(a) for a in actions)
        t = len(actions)
        if not 1 <= t <= self.horizon:
            raise ValidationError(f"Action sequence of length {t} does not fit horizon {self.horizon}")
        for s, a in enumerate(actions):
            if not 0 <= a < self.action_cardinalities[s]:
                raise ValidationError(f"Action {a} out of range at step {s + 1}")

        override = self._override_for(actions) if self.overrides else None
        if override is not None:
            return self._overridden_joint(*override)

        joint = self.confounder_probs[:, None] * self.x0_table
        for s in range(t):
            index = (slice(None), slice(None))
            for r in range(s + 1):
                index = index + (actions[r], slice(None))
            joint = joint[..., None] * self.dynamics[s][index]
        return joint

    def _overridden_joint(self, actions: Tuple[int, ...], atoms_star: Tuple[int, ...]) -> np.ndarray:
        t = len(actions)
        factual = self.factual_joint()
        # marginalize steps after t, then walk the atoms
        for _ in range(2 * (self.horizon - t)):
            factual = factual.sum(axis=-1)
        shape = (factual.shape[0], factual.shape[1]) + tuple(len(self.obs_values[s]) for s in range(t))
        joint = np.zeros(shape)
        for idx in zip(*np.nonzero(factual)):
            u, x0 = idx[0], idx[1]
            taken = idx[2::2]
            observed = idx[3::2]
            N = next((s for s in range(t) if taken[s] != actions[s]), t)
            path = tuple(observed[:N]) + tuple(atoms_star[N:])
            joint[(u, x0) + path] += factual[idx]
        return joint

    def step_values(self, s: int, index: int) -> np.ndarray:
        """Observation vector of atom ``index`` at step s >= 1"""
        return self.obs_values[s - 1][index]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "confounder_probs": self.confounder_probs.tolist(),
            "x0_features": [f.to_dict() for f in self.x0_features],
            "step_features": [f.to_dict() for f in self.step_features],
            "outcome_feature": self.outcome_feature,
            "x0_values": self.x0_values.tolist(),
            "x0_table": self.x0_table.tolist(),
            "action_cardinalities": list(self.action_cardinalities),
            "obs_values": [v.tolist() for v in self.obs_values],
            "policy": [p.tolist() for p in self.policy],
            "dynamics": [d.tolist() for d in self.dynamics],
            "overrides": [{"actions": list(a), "obs": list(x)} for a, x in self.overrides.items()],
            "labels": self.labels,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DiscreteWorld":
        try:
            return cls(
                name=data.get("name", "world"),
                confounder_probs=data["confounder_probs"],
                x0_features=[Feature.from_dict(f) for f in data.get("x0_features", [])],
                step_features=[Feature.from_dict(f) for f in data["step_features"]],
                outcome_feature=data["outcome_feature"],
                x0_values=data["x0_values"],
                x0_table=data["x0_table"],
                action_cardinalities=data["action_cardinalities"],
                obs_values=data["obs_values"],
                policy=data["policy"],
                dynamics=data["dynamics"],
                overrides={tuple(o["actions"]): tuple(o["obs"]) for o in data.get("overrides", [])},
                labels=data.get("labels", {}),
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Invalid world description: {e}")

    @classmethod
    def from_file(cls, path: str) -> "DiscreteWorld":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"World file not found: {path}")
        except json.JSONDecodeError as e:
            raise ValidationError(f"Invalid world JSON in {path}: {e}")
        return cls.from_dict(data)

    def dump(self, path: str):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


def sample_observational(w: DiscreteWorld, n: int, seed: int = 0) -> TrajectoryDataset:
    """n i.i.d. factual trajectories drawn from the enumerated joint"""
    if n < 0:
        raise ValidationError(f"Sample size must be nonnegative, got {n}")
    joint = w.factual_joint()
    flat = joint.ravel() / joint.sum()
    rng = np.random.default_rng(seed)
    cells = rng.choice(flat.size, size=n, p=flat)
    idx = np.unravel_index(cells, joint.shape)
    x0 = w.x0_values[idx[1]]
    actions = np.stack(idx[2::2], axis=1) if n else np.zeros((0, w.horizon), dtype=np.int64)
    steps = [w.obs_values[s][idx[3 + 2 * s]] for s in range(w.horizon)]
    x = np.stack(steps, axis=1) if n else np.zeros((0, w.horizon, len(w.step_features)))
    logger.debug(f"Sampled {n} trajectories from world '{w.name}'")
    return TrajectoryDataset(w.schema, x0, actions, x, provenance=f"world:{w.name}:seed={seed}")
