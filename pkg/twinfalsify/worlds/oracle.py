"""Exact bounds by exhaustive enumeration of a DiscreteWorld.

Deliberately atom by atom: this is the reference the sample statistics
are checked against.
"""

import logging
from typing import List, NamedTuple

import numpy as np

from .world import DiscreteWorld
from ..errors import PositivityError
from ..hypothesis.region import eval_region
from ..hypothesis.spec import HypothesisSpec

logger = logging.getLogger(__name__)


class OracleBounds(NamedTuple):
    q: float
    q_lo: float
    q_up: float


def _path(w: DiscreteWorld, x0_index: int, obs_indices) -> List[np.ndarray]:
    return [w.x0_values[x0_index]] + [w.obs_values[s][j] for s, j in enumerate(obs_indices)]


def _outcome(spec: HypothesisSpec, xs, index: int) -> float:
    raw = xs[spec.t][index]
    return float(spec.outcome.apply(np.array([raw]))[0])


def _observational_marginal(w: DiscreteWorld, t: int) -> np.ndarray:
    law = w.observational_law()
    for _ in range(2 * (w.horizon - t)):
        law = law.sum(axis=-1)
    return law


def interventional_mean(w: DiscreteWorld, spec: HypothesisSpec) -> float:
    """Q = E[f(X(a)) | X_{0:t}(a) in B_{0:t}]"""
    schema = w.schema
    oi = schema.step_index(spec.outcome.feature)
    spec.check(schema)
    law = w.interventional_joint(spec.actions).sum(axis=0)
    num = den = 0.0
    for idx in np.ndindex(law.shape):
        mass = law[idx]
        if mass == 0:
            continue
        xs = _path(w, idx[0], idx[1:])
        if eval_region(spec.region, schema, xs, spec.t):
            den += mass
            num += mass * _outcome(spec, xs, oi)
    if den <= 0:
        raise PositivityError(f"{spec.spec_id or 'spec'}: P(X(a) in B) = 0 in world '{w.name}'")
    return num / den


def observational_conditional_mean(w: DiscreteWorld, spec: HypothesisSpec) -> float:
    """Naive E[f(X) | A_{1:t} = a_{1:t}, X_{0:t} in B_{0:t}]"""
    schema = w.schema
    oi = schema.step_index(spec.outcome.feature)
    law = _observational_marginal(w, spec.t)
    num = den = 0.0
    for idx in np.ndindex(law.shape):
        mass = law[idx]
        if mass == 0 or tuple(idx[1::2]) != spec.actions:
            continue
        xs = _path(w, idx[0], idx[2::2])
        if eval_region(spec.region, schema, xs, spec.t):
            den += mass
            num += mass * _outcome(spec, xs, oi)
    if den <= 0:
        raise PositivityError(f"{spec.spec_id or 'spec'}: P(A = a, X in B) = 0 in world '{w.name}'")
    return num / den


def exact_bounds_oracle(w: DiscreteWorld, spec: HypothesisSpec) -> OracleBounds:
    """(Q, Q_lo, Q_up) computed by summing over every atom"""
    q = interventional_mean(w, spec)
    schema = w.schema
    oi = schema.step_index(spec.outcome.feature)
    law = _observational_marginal(w, spec.t)
    y_lo, y_up = spec.outcome.y_lo, spec.outcome.y_up
    lo = up = den = 0.0
    for idx in np.ndindex(law.shape):
        mass = law[idx]
        if mass == 0:
            continue
        taken = idx[1::2]
        N = 0
        while N < spec.t and taken[N] == spec.actions[N]:
            N += 1
        xs = _path(w, idx[0], idx[2::2])
        if not eval_region(spec.region, schema, xs, N):
            continue
        den += mass
        if N == spec.t:
            value = _outcome(spec, xs, oi)
            lo += mass * value
            up += mass * value
        else:
            lo += mass * y_lo
            up += mass * y_up
    result = OracleBounds(q, lo / den, up / den)
    logger.debug(f"Oracle for {spec.spec_id or 'spec'} on '{w.name}': {result}")
    return result
