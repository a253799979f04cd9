"""Twins simulated from a DiscreteWorld.

Modes:
  correct           samples X_s(a_{1:s}) from the world's interventional law
  shifted           correct, with the outcome feature moved by delta (clamped)
  propensity_blind  samples from the observational law P(X_s | history, A_{1:s} = a_{1:s})
  stratum           simulates a single confounder value for every unit
"""

import logging
import threading
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .session import TwinFactory, TwinSession
from ..errors import TwinError, ValidationError
from ..worlds.world import DiscreteWorld

logger = logging.getLogger(__name__)

MODES = ("correct", "shifted", "propensity_blind", "stratum")


class WorldLaws:
    """Conditional step laws of a world, computed once per action prefix"""

    def __init__(self, world: DiscreteWorld):
        self.world = world
        self._lock = threading.Lock()
        self._interventional: Dict[Tuple[int, ...], np.ndarray] = {}
        self._observational: Dict[int, np.ndarray] = {}

    def interventional(self, prefix: Tuple[int, ...]) -> np.ndarray:
        """P(X0, X1(a_1), ..., X_s(a_{1:s}))"""
        with self._lock:
            if prefix not in self._interventional:
                self._interventional[prefix] = self.world.interventional_joint(prefix).sum(axis=0)
            return self._interventional[prefix]

    def observational(self, s: int) -> np.ndarray:
        """P(X0, A1, X1, ..., A_s, X_s)"""
        with self._lock:
            if s not in self._observational:
                law = self.world.observational_law()
                for _ in range(2 * (self.world.horizon - s)):
                    law = law.sum(axis=-1)
                self._observational[s] = law
            return self._observational[s]

    def x0_index(self, x0: Sequence[float]) -> int:
        x0 = np.asarray(x0, dtype=float)
        values = self.world.x0_values
        if x0.shape != values.shape[1:]:
            raise ValidationError(f"Expected {values.shape[1]} X0 values, got {x0.size}")
        hits = np.flatnonzero(np.all(np.isclose(values, x0), axis=1))
        if hits.size == 0:
            raise ValidationError(f"X0 {x0.tolist()} is not an atom of world '{self.world.name}'")
        return int(hits[0])


def _draw(rng: np.random.Generator, weights: np.ndarray) -> int:
    total = weights.sum()
    if total <= 0:
        raise ValidationError("zero-probability history")
    cumulative = np.cumsum(weights)
    return min(int(np.searchsorted(cumulative, rng.random() * total, side="right")), len(weights) - 1)


class BuiltinTwinSession(TwinSession):

    def __init__(self, factory: "BuiltinTwinFactory", rng: np.random.Generator):
        self.factory = factory
        self.rng = rng
        self.clamped = 0
        self._x0: Optional[int] = None
        self._actions: List[int] = []
        self._obs: List[int] = []

    def init(self, x0: Sequence[float]):
        self._x0 = self.factory.laws.x0_index(x0)
        self._actions, self._obs = [], []
        if self.factory.mode == "stratum":
            self._u = self.factory.stratum

    def reset(self):
        self._x0 = None
        self._actions, self._obs = [], []

    def _weights(self, action: int) -> np.ndarray:
        world, mode = self.factory.world, self.factory.mode
        history = []
        for a, x in zip(self._actions, self._obs):
            history += [a, x]
        if mode == "propensity_blind":
            law = self.factory.laws.observational(len(self._actions) + 1)
            return law[(self._x0, *history, action)]
        if mode == "stratum":
            return world.dynamics[len(self._actions)][(self._u, self._x0, *history, action)]
        prefix = tuple(self._actions) + (action,)
        law = self.factory.laws.interventional(prefix)
        return law[(self._x0, *self._obs)]

    def step(self, action: int, raw: Optional[Sequence[float]] = None) -> List[float]:
        world = self.factory.world
        if self._x0 is None:
            raise TwinError("step before init")
        s = len(self._actions) + 1
        if s > world.horizon:
            raise TwinError(f"world '{world.name}' has horizon {world.horizon}")
        if not 0 <= action < world.action_cardinalities[s - 1]:
            raise TwinError(f"action {action} out of range at step {s}")
        try:
            index = _draw(self.rng, self._weights(action))
        except ValidationError as e:
            raise TwinError(f"{self.factory.mode} twin cannot continue: {e}")
        self._actions.append(action)
        self._obs.append(index)

        values = world.step_values(s, index).tolist()
        if self.factory.mode == "shifted":
            i = world.outcome_index
            lo, hi = self.factory.outcome_support
            shifted = values[i] + self.factory.delta
            values[i] = min(max(shifted, lo), hi)
            if values[i] != shifted:
                self.clamped += 1
        return values


class BuiltinTwinFactory(TwinFactory):

    def __init__(self, world: DiscreteWorld, mode: str = "correct", delta: float = 0.0, stratum: int = 0):
        if mode not in MODES:
            raise ValidationError(f"Unknown twin mode '{mode}', expected one of {MODES}")
        if mode == "stratum" and not 0 <= stratum < len(world.confounder_probs):
            raise ValidationError(f"Stratum {stratum} out of range for world '{world.name}'")
        self.world = world
        self.mode = mode
        self.delta = float(delta)
        self.stratum = int(stratum)
        self.laws = WorldLaws(world)
        support = np.concatenate([v[:, world.outcome_index] for v in world.obs_values])
        self.outcome_support = (float(support.min()), float(support.max()))
        self._clamped = 0
        self._lock = threading.Lock()
        suffix = {"shifted": f"({self.delta:g})", "stratum": f"({self.stratum})"}.get(mode, "")
        self.twin_id = f"builtin:{world.name}:{mode}{suffix}"

    def create(self, index: int, seed: int) -> BuiltinTwinSession:
        return BuiltinTwinSession(self, np.random.default_rng([seed, index]))

    def release(self, session: BuiltinTwinSession):
        if session.clamped:
            with self._lock:
                self._clamped += session.clamped

    @property
    def clamped_outputs(self) -> int:
        return self._clamped

    def metadata(self) -> Dict[str, Any]:
        meta: Dict[str, Any] = {"twin_id": self.twin_id, "mode": self.mode}
        if self.mode == "shifted":
            meta["delta"] = self.delta
            meta["clamped_outputs"] = self._clamped
        if self.mode == "stratum":
            meta["stratum"] = self.stratum
        return meta


def builtin_twin(world: DiscreteWorld, mode: str = "correct", delta: float = 0.0,
                 stratum: int = 0) -> BuiltinTwinFactory:
    """Factory of sessions simulating ``world`` in the given mode"""
    factory = BuiltinTwinFactory(world, mode, delta, stratum)
    logger.debug(f"Created twin {factory.twin_id}")
    return factory
