"""Hypothesis generation from the held-out dataset.

The patient space is partitioned into cells: sex x age quartile x
(below/above the median of the target quantity at each timestep 0..t).
Every (t, a_{1:t}, cell) hit by at least one held-out trajectory becomes
a hypothesis; y_lo and y_up are quantiles of the quantity at t over the
trajectories in that cell.
"""

import logging
import math
from collections import defaultdict
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .region import Constraint, IntervalConstraint, MembershipConstraint, RegionPredicate
from .spec import HypothesisSpec, OutcomeSpec
from ..data.dataset import TrajectoryDataset
from ..errors import ValidationError

logger = logging.getLogger(__name__)


def _interval_bins(feature: str, edges: Sequence[float]) -> List[IntervalConstraint]:
    """Half-open bins over the real line, topmost one closed"""
    bounds = [-math.inf, *sorted(set(float(e) for e in edges)), math.inf]
    return [
        IntervalConstraint(feature, bounds[k], bounds[k + 1], closed_right=(k == len(bounds) - 2))
        for k in range(len(bounds) - 1)
    ]


def _assign(constraints: Sequence[Constraint], values: np.ndarray) -> np.ndarray:
    codes = np.full(len(values), -1, dtype=np.int64)
    for k, c in enumerate(constraints):
        codes[(codes < 0) & c.mask(values)] = k
    return codes


class _Partition:
    """Bins for one quantity, with per-record bin codes"""

    def __init__(self, d0: TrajectoryDataset, quantity: str, sex_feature: str,
                 age_feature: str, median_split: str):
        schema = d0.schema
        self.x0_bins: List[List[Constraint]] = []
        x0_codes = []
        if schema.has_feature_at(sex_feature, 0):
            values = d0.x0[:, schema.x0_index(sex_feature)]
            bins = [MembershipConstraint(sex_feature, frozenset([float(v)])) for v in np.unique(values)]
            self.x0_bins.append(bins)
            x0_codes.append(_assign(bins, values))
        if schema.has_feature_at(age_feature, 0):
            values = d0.x0[:, schema.x0_index(age_feature)]
            bins = _interval_bins(age_feature, np.quantile(values, [0.25, 0.5, 0.75]))
            self.x0_bins.append(bins)
            x0_codes.append(_assign(bins, values))

        # quantity values per timestep; column 0 only if it is also an X0 feature
        horizon = schema.horizon
        qi = schema.step_index(quantity)
        series: List[Optional[np.ndarray]] = [None] * (horizon + 1)
        if schema.has_feature_at(quantity, 0):
            series[0] = d0.x0[:, schema.x0_index(quantity)]
        for s in range(1, horizon + 1):
            series[s] = d0.x[:, s - 1, qi]

        if median_split == "pooled":
            pooled = np.median(np.concatenate([v for v in series if v is not None]))
            medians = [None if v is None else pooled for v in series]
        else:
            medians = [None if v is None else np.median(v) for v in series]

        self.quantity_bins: List[Optional[List[Constraint]]] = []
        q_codes = []
        for v, m in zip(series, medians):
            if v is None:
                self.quantity_bins.append(None)
                q_codes.append(np.zeros(len(d0), dtype=np.int64))
            else:
                bins = _interval_bins(quantity, [m])
                self.quantity_bins.append(bins)
                q_codes.append(_assign(bins, v))

        n = len(d0)
        self.x0_codes = np.stack(x0_codes, axis=1) if x0_codes else np.zeros((n, 0), dtype=np.int64)
        self.q_codes = np.stack(q_codes, axis=1)

    def region(self, t: int, x0_cell: Tuple[int, ...], q_cell: Tuple[int, ...]) -> RegionPredicate:
        steps = []
        for s in range(t + 1):
            conjunction: List[Constraint] = []
            if s == 0:
                conjunction.extend(bins[k] for bins, k in zip(self.x0_bins, x0_cell))
            if self.quantity_bins[s] is not None:
                conjunction.append(self.quantity_bins[s][q_cell[s]])
            steps.append(tuple(conjunction))
        return RegionPredicate(tuple(steps))


def generate_hypotheses(d0: TrajectoryDataset, quantities: Sequence[str], q_lo: float = 0.2,
                        q_up: float = 0.8, sex_feature: str = "sex", age_feature: str = "age",
                        median_split: str = "per_timestep") -> List[HypothesisSpec]:
    """Build every supported hypothesis for each quantity and t in 1..T"""
    if len(d0) == 0:
        raise ValidationError("Cannot generate hypotheses from an empty held-out dataset")
    if not 0.0 <= q_lo < q_up <= 1.0:
        raise ValidationError(f"Need 0 <= q_lo < q_up <= 1, got {q_lo}, {q_up}")
    if median_split not in ("per_timestep", "pooled"):
        raise ValidationError(f"Unknown median_split: {median_split}")
    schema = d0.schema
    for quantity in quantities:
        schema.step_index(quantity)

    specs: Dict[str, HypothesisSpec] = {}
    for quantity in quantities:
        partition = _Partition(d0, quantity, sex_feature, age_feature, median_split)
        qi = schema.step_index(quantity)
        for t in range(1, schema.horizon + 1):
            groups: Dict[tuple, List[int]] = defaultdict(list)
            for i in range(len(d0)):
                key = (
                    tuple(int(a) for a in d0.actions[i, :t]),
                    tuple(int(c) for c in partition.x0_codes[i]),
                    tuple(int(c) for c in partition.q_codes[i, :t + 1]),
                )
                groups[key].append(i)
            for (actions, x0_cell, q_cell), members in sorted(groups.items()):
                values = d0.x[members, t - 1, qi]
                y_lo, y_up = (float(v) for v in np.quantile(values, [q_lo, q_up]))
                spec = HypothesisSpec(
                    t=t,
                    actions=actions,
                    region=partition.region(t, x0_cell, q_cell),
                    outcome=OutcomeSpec(t, quantity, y_lo, y_up),
                    label=quantity,
                )
                if spec.degenerate:
                    logger.debug(f"Degenerate interval for {quantity} t={t} a={actions}: {y_lo}")
                specs.setdefault(spec.key(), spec)

    ordered = [replace(spec, spec_id=f"H{k:05d}") for k, spec in enumerate(specs.values())]
    logger.info(f"Generated {len(ordered)} hypotheses for {len(quantities)} quantities")
    return ordered
