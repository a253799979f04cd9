"""Constructive worlds: attaining the bounds, and random worlds"""

import logging
from dataclasses import replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .world import DiscreteWorld
from ..data.schema import Feature, FeatureKind
from ..errors import ValidationError
from ..hypothesis.region import IntervalConstraint, MembershipConstraint, RegionPredicate
from ..hypothesis.spec import HypothesisSpec, OutcomeSpec

logger = logging.getLogger(__name__)


def world_spec(w: DiscreteWorld, actions: Sequence[int], region: Optional[RegionPredicate] = None,
               y_lo: Optional[float] = None, y_up: Optional[float] = None,
               spec_id: str = "") -> HypothesisSpec:
    """Spec on the world's outcome feature; the interval defaults to the support of the outcome"""
    t = len(actions)
    values = w.obs_values[t - 1][:, w.outcome_index]
    return HypothesisSpec(
        t=t,
        actions=tuple(actions),
        region=region if region is not None else RegionPredicate.whole_space(t),
        outcome=OutcomeSpec(
            t, w.outcome_feature,
            float(values.min()) if y_lo is None else y_lo,
            float(values.max()) if y_up is None else y_up,
        ),
        label=w.outcome_feature,
        spec_id=spec_id or f"{w.name}:a={'-'.join(map(str, actions))}",
    )


def _disagreement_mass(w: DiscreteWorld, actions: Tuple[int, ...]) -> float:
    law = w.observational_law()
    for _ in range(2 * (w.horizon - len(actions))):
        law = law.sum(axis=-1)
    agree = law
    for a in actions:
        agree = agree.take(a, axis=1)
        agree = agree.sum(axis=1)
    return 1.0 - float(agree.sum())


def nonidentifiability_pair(w: DiscreteWorld, actions: Sequence[int],
                            spec: Optional[HypothesisSpec] = None) -> Tuple[DiscreteWorld, DiscreteWorld]:
    """Two worlds observationally identical to w whose Q equals Q_lo and Q_up of w.

    Potential outcomes under a_{1:t} are left factual up to the last
    agreement index N; afterwards they are set to atoms inside B, the step-t
    atom minimizing (w_lo) or maximizing (w_up) f on B_t.
    """
    actions = tuple(int(a) for a in actions)
    spec = spec if spec is not None else world_spec(w, actions)
    if spec.actions != actions:
        raise ValidationError(f"Spec actions {list(spec.actions)} differ from {list(actions)}")
    spec.check(w.schema)
    if _disagreement_mass(w, actions) <= 1e-12:
        raise ValidationError(f"World '{w.name}' never deviates from {list(actions)}; bounds are already tight")

    schema, t = w.schema, spec.t
    inside = []
    for s in range(1, t + 1):
        mask = spec.region.step_mask(schema, w.obs_values[s - 1], s)
        if not mask.any():
            raise ValidationError(f"Region step {s} contains no observation atom of world '{w.name}'")
        inside.append(np.flatnonzero(mask))

    candidates = inside[-1]
    f = spec.outcome.apply(w.obs_values[t - 1][candidates, schema.step_index(spec.outcome.feature)])
    lo_atom, up_atom = int(candidates[np.argmin(f)]), int(candidates[np.argmax(f)])
    if f.min() != spec.outcome.y_lo or f.max() != spec.outcome.y_up:
        raise ValidationError(
            f"f on B_t ranges over [{f.min()}, {f.max()}], which does not attain "
            f"[{spec.outcome.y_lo}, {spec.outcome.y_up}]"
        )
    prefix = tuple(int(idx[0]) for idx in inside[:-1])

    w_lo = replace(w, name=f"{w.name}:lo", overrides={**w.overrides, actions: prefix + (lo_atom,)})
    w_up = replace(w, name=f"{w.name}:up", overrides={**w.overrides, actions: prefix + (up_atom,)})
    logger.info(f"Constructed observationally equivalent pair for '{w.name}' under a={list(actions)}")
    return w_lo, w_up


def random_world(seed: int, horizon: int = 2, n_confounders: int = 2, n_x0: int = 2,
                 n_actions: int = 2, n_obs: int = 3) -> DiscreteWorld:
    """World with Dirichlet(1, ..., 1) rows in every table"""
    rng = np.random.default_rng(seed)

    def rows(shape):
        return rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])

    K = n_confounders
    history = (K, n_x0)
    policy, dynamics = [], []
    for _ in range(horizon):
        policy.append(rows(history + (n_actions,)))
        history = history + (n_actions,)
        dynamics.append(rows(history + (n_obs,)))
        history = history + (n_obs,)
    obs = np.round(np.sort(rng.uniform(0.0, 1.0, size=n_obs)), 6)
    return DiscreteWorld(
        name=f"random-{seed}",
        confounder_probs=rng.dirichlet(np.ones(K)),
        x0_features=[Feature("x0", FeatureKind.CATEGORICAL, n_x0)],
        step_features=[Feature("y")],
        outcome_feature="y",
        x0_values=np.arange(n_x0, dtype=float)[:, None],
        x0_table=rows((K, n_x0)),
        action_cardinalities=[n_actions] * horizon,
        obs_values=[obs[:, None] for _ in range(horizon)],
        policy=policy,
        dynamics=dynamics,
    )


def random_spec(w: DiscreteWorld, rng: np.random.Generator, spec_id: str = "") -> HypothesisSpec:
    """Random t, actions and box region; [y_lo, y_up] spans f over the step-t atoms in B_t"""
    t = int(rng.integers(1, w.horizon + 1))
    actions = tuple(int(rng.integers(0, k)) for k in w.action_cardinalities[:t])
    steps = []
    x0_name = w.x0_features[0].name
    x0_support = np.unique(w.x0_values[:, 0])
    chosen = x0_support[rng.random(x0_support.size) < 0.7]
    steps.append((MembershipConstraint(x0_name, frozenset(chosen.tolist() or x0_support.tolist())),))
    for s in range(1, t + 1):
        values = np.sort(w.obs_values[s - 1][:, w.outcome_index])
        lo_k = int(rng.integers(0, values.size))
        hi_k = int(rng.integers(lo_k, values.size))
        steps.append((IntervalConstraint(w.outcome_feature, float(values[lo_k]), float(values[hi_k]),
                                         closed_right=True),))
    inside = values[lo_k:hi_k + 1]
    return world_spec(w, actions, RegionPredicate(tuple(steps)), float(inside.min()), float(inside.max()),
                      spec_id=spec_id)
