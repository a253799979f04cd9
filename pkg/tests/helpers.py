"""Shared fixtures for the test suite."""

import os
import unittest

import numpy as np

from twinfalsify.data import Feature, FeatureKind, FeatureSchema, TrajectoryDataset
from twinfalsify.hypothesis import HypothesisSpec, OutcomeSpec, RegionPredicate

FAST = os.getenv("TWINFALSIFY_FAST_TESTS") == "1"

monte_carlo = unittest.skipIf(FAST, "TWINFALSIFY_FAST_TESTS=1")


def assert_tightness(test: unittest.TestCase, summary, spec):
    """(mu_up - mu_lo) / range == 1 - propensity_hat"""
    if summary.n == 0 or spec.outcome.y_range == 0:
        return
    ratio = (summary.mu_up - summary.mu_lo) / spec.outcome.y_range
    test.assertAlmostEqual(ratio, 1.0 - summary.propensity_hat, delta=1e-12)


def toy_schema(horizon: int = 2, actions: int = 2) -> FeatureSchema:
    """sex, age at X0; hr (continuous) and flag (binary) per step"""
    return FeatureSchema(
        horizon=horizon,
        x0_features=[Feature("sex", FeatureKind.BINARY), Feature("age")],
        step_features=[Feature("hr"), Feature("flag", FeatureKind.BINARY)],
        action_cardinalities=[actions] * horizon,
    )


def toy_dataset(n: int = 200, seed: int = 0, horizon: int = 2) -> TrajectoryDataset:
    rng = np.random.default_rng(seed)
    schema = toy_schema(horizon)
    x0 = np.stack([rng.integers(0, 2, n), rng.uniform(20, 90, n)], axis=1)
    actions = rng.integers(0, 2, (n, horizon))
    hr = rng.normal(80, 10, (n, horizon)) + 5 * actions
    flag = (hr > 85).astype(float)
    x = np.stack([hr, flag], axis=2)
    return TrajectoryDataset(schema, x0, actions, x, provenance="toy")


def record(x0, steps):
    """JSON-ready record from x0 and (a, x) pairs"""
    return {"x0": list(x0), "steps": [{"a": a, "x": list(x)} for a, x in steps]}


def one_step(actions, ys) -> TrajectoryDataset:
    """One-step dataset with two actions and a single outcome y"""
    schema = FeatureSchema(1, [], [Feature("y")], [2])
    n = len(actions)
    return TrajectoryDataset(schema, np.zeros((n, 0)), np.array(actions).reshape(n, 1),
                             np.array(ys, dtype=float).reshape(n, 1, 1))


def y_spec(actions, region=None, y_lo=0.0, y_up=1.0) -> HypothesisSpec:
    t = len(actions)
    return HypothesisSpec(t, tuple(actions), region or RegionPredicate.whole_space(t),
                          OutcomeSpec(t, "y", y_lo, y_up), "y", "S")


def dose_dataset(doses: np.ndarray) -> TrajectoryDataset:
    """One-step dataset whose only step features are a dose and an outcome"""
    schema = FeatureSchema(1, [], [Feature("dose"), Feature("y")], [1])
    n = len(doses)
    x = np.stack([doses, np.zeros(n)], axis=1).reshape(n, 1, 2)
    return TrajectoryDataset(schema, np.zeros((n, 0)), np.zeros((n, 1), dtype=int), x)
