"""Sample quantities of the longitudinal causal bounds.

For an observed trajectory and target actions a_{1:t}, N is the last index
at which the taken actions still agree with a_{1:t}. The trajectory
qualifies when its observed prefix X_{0:N} lies in B_{0:N}; only the prefix
up to N is judged. A qualifying trajectory contributes
Y_lo = Y_up = f(X_{0:t}) under full agreement and (y_lo, y_up) otherwise.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..data.dataset import ObservationalTrajectory, TrajectoryDataset
from ..data.schema import FeatureSchema
from ..errors import ValidationError
from ..hypothesis.region import eval_region
from ..hypothesis.spec import HypothesisSpec, eval_outcome

logger = logging.getLogger(__name__)


@dataclass
class BoundSummary:
    """Observational statistics feeding the tests of H_lo and H_up"""
    n: int
    n_agree: int
    y_lo: float
    y_up: float
    mu_lo: Optional[float] = None
    mu_up: Optional[float] = None
    propensity_hat: Optional[float] = None
    tightness_hat: Optional[float] = None
    lo_samples: np.ndarray = field(default=None, repr=False, compare=False)
    up_samples: np.ndarray = field(default=None, repr=False, compare=False)
    agree_outcomes: np.ndarray = field(default=None, repr=False, compare=False)
    agree_raw: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def empty(self) -> bool:
        return self.n == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "n_agree": self.n_agree,
            "mu_lo": self.mu_lo,
            "mu_up": self.mu_up,
            "propensity_hat": self.propensity_hat,
            "tightness_hat": self.tightness_hat,
        }


@dataclass
class TwinSummary:
    n_hat: int
    mu_hat: Optional[float] = None
    samples: np.ndarray = field(default=None, repr=False, compare=False)
    raw: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def empty(self) -> bool:
        return self.n_hat == 0

    def to_dict(self) -> Dict[str, Any]:
        return {"n_hat": self.n_hat, "mu_hat": self.mu_hat}


def last_agreement_index(taken: Sequence[int], target: Sequence[int]) -> int:
    """Largest s with taken[:s] == target[:s]"""
    if len(taken) != len(target):
        raise ValidationError(f"Action sequences differ in length: {len(taken)} vs {len(target)}")
    for s, (a, b) in enumerate(zip(taken, target)):
        if a != b:
            return s
    return len(target)


def last_agreement_indices(actions: np.ndarray, target: Sequence[int]) -> np.ndarray:
    """Vectorized last_agreement_index over rows of an (n, t) action array"""
    target = np.asarray(target, dtype=np.int64)
    agree = np.asarray(actions)[:, :len(target)] == target
    return np.cumprod(agree, axis=1).sum(axis=1).astype(np.int64)


def transformed_outcomes(traj: ObservationalTrajectory, spec: HypothesisSpec,
                         schema: FeatureSchema) -> Optional[Tuple[float, float]]:
    """(Y_lo, Y_up) for one trajectory, or None if it does not qualify"""
    taken = traj.actions[:spec.t]
    N = last_agreement_index(taken, spec.actions)
    xs = [traj.x0] + [step.x for step in traj.steps[:spec.t]]
    if not eval_region(spec.region, schema, xs, N):
        return None
    if N == spec.t:
        value, _ = eval_outcome(spec.outcome, schema, xs)
        return value, value
    return spec.outcome.y_lo, spec.outcome.y_up


def _mean(values: np.ndarray) -> Optional[float]:
    return float(values.mean()) if values.size else None


def summarize_observational(d: TrajectoryDataset, spec: HypothesisSpec) -> BoundSummary:
    """n, mu_lo, mu_up and the empirical propensity over qualifying trajectories"""
    schema = d.schema
    spec.check(schema)
    t, outcome = spec.t, spec.outcome

    N = last_agreement_indices(d.actions, spec.actions)
    prefix = spec.region.prefix_masks(schema, d.x0, d.x, upto=t)
    qualifies = prefix[np.arange(len(d)), N] if len(d) else np.zeros(0, dtype=bool)
    agree = qualifies & (N == t)

    raw = outcome.raw_values(schema, d.x)
    values = outcome.apply(raw)
    lo_samples = np.where(agree, values, outcome.y_lo)[qualifies]
    up_samples = np.where(agree, values, outcome.y_up)[qualifies]

    n, n_agree = int(qualifies.sum()), int(agree.sum())
    summary = BoundSummary(
        n=n, n_agree=n_agree, y_lo=outcome.y_lo, y_up=outcome.y_up,
        lo_samples=lo_samples, up_samples=up_samples,
        agree_outcomes=values[agree], agree_raw=raw[agree],
    )
    if n:
        summary.mu_lo = _mean(lo_samples)
        summary.mu_up = _mean(up_samples)
        summary.propensity_hat = n_agree / n
        if outcome.y_range > 0:
            summary.tightness_hat = (summary.mu_up - summary.mu_lo) / outcome.y_range
        else:
            summary.tightness_hat = 0.0
    logger.debug(f"{spec.spec_id}: n={n} n_agree={n_agree} mu_lo={summary.mu_lo} mu_up={summary.mu_up}")
    return summary


def check_twin_tag(d_twin, spec: HypothesisSpec):
    """The twin data must be generated under a_{1:t} (longer tags extend it)"""
    if tuple(d_twin.tag[:spec.t]) != spec.actions or len(d_twin.tag) < spec.t:
        raise ValidationError(
            f"{spec.spec_id}: twin data tagged {list(d_twin.tag)} does not match actions {list(spec.actions)}"
        )


def summarize_twin(d_twin, spec: HypothesisSpec) -> TwinSummary:
    """n_hat and mu_hat over twin trajectories whose full path lies in B_{0:t}"""
    check_twin_tag(d_twin, spec)
    schema = d_twin.schema
    inside = spec.region.prefix_masks(schema, d_twin.x0, d_twin.x, upto=spec.t)[:, spec.t]
    raw = spec.outcome.raw_values(schema, d_twin.x)[inside]
    samples = spec.outcome.apply(raw)
    return TwinSummary(n_hat=int(inside.sum()), mu_hat=_mean(samples), samples=samples, raw=raw)
