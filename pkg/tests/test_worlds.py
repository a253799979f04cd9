"""Tests for enumerable worlds, the exact oracle and the sharpness constructions."""

import tempfile
import unittest
from dataclasses import replace
from pathlib import Path

import numpy as np

from twinfalsify.bounds import summarize_observational
from twinfalsify.errors import PositivityError, ValidationError
from twinfalsify.hypothesis import IntervalConstraint, MembershipConstraint, RegionPredicate
from twinfalsify.worlds import (
    DiscreteWorld,
    available_fixtures,
    brake_pad_world,
    confounded_world,
    deterministic_world,
    exact_bounds_oracle,
    interventional_mean,
    load_fixture,
    nonidentifiability_pair,
    observational_conditional_mean,
    random_spec,
    random_world,
    sample_observational,
    world_spec,
)
from twinfalsify.worlds.fixtures import AGGRESSIVE, GENTLE

from tests.helpers import assert_tightness, monte_carlo


class TestBrakePad(unittest.TestCase):
    """The one-step braking example with hidden pad condition."""

    def setUp(self):
        self.w = brake_pad_world()

    def test_exact_values(self):
        spec = world_spec(self.w, (AGGRESSIVE,))
        q, q_lo, q_up = exact_bounds_oracle(self.w, spec)
        self.assertAlmostEqual(q, 0.5)
        self.assertAlmostEqual(q_lo, 0.45)
        self.assertAlmostEqual(q_up, 0.95)
        self.assertAlmostEqual(observational_conditional_mean(self.w, spec), 0.9)

    def test_gentle_braking(self):
        q, q_lo, q_up = exact_bounds_oracle(self.w, world_spec(self.w, (GENTLE,)))
        self.assertAlmostEqual(q, 0.5)
        self.assertAlmostEqual(q_lo, 0.25)
        self.assertAlmostEqual(q_up, 0.75)

    def test_high_propensity_variant(self):
        w = brake_pad_world(0.99, 0.9)
        q, q_lo, q_up = exact_bounds_oracle(w, world_spec(w, (AGGRESSIVE,)))
        self.assertAlmostEqual(q, 0.5)
        self.assertAlmostEqual(q_lo, 0.495)
        self.assertAlmostEqual(q_up, 0.55)

    def test_shipped_fixture_matches_constructor(self):
        fixture = load_fixture("brake_pad")
        shipped, built = fixture.to_dict(), self.w.to_dict()
        self.assertEqual(shipped.keys(), built.keys())
        for key in ("confounder_probs", "x0_values", "x0_table"):
            np.testing.assert_allclose(shipped[key], built[key], atol=1e-12, err_msg=key)
        for key in ("obs_values", "policy", "dynamics"):
            self.assertEqual(len(shipped[key]), len(built[key]), key)
            for a, b in zip(shipped[key], built[key]):
                np.testing.assert_allclose(a, b, atol=1e-12, err_msg=key)
        for key in set(shipped) - {"confounder_probs", "x0_values", "x0_table", "obs_values", "policy", "dynamics"}:
            self.assertEqual(shipped[key], built[key], key)
        for a in (GENTLE, AGGRESSIVE):
            spec = world_spec(fixture, (a,))
            np.testing.assert_allclose(exact_bounds_oracle(fixture, spec), exact_bounds_oracle(self.w, spec),
                                       atol=1e-12)


class TestWorldTables(unittest.TestCase):
    """Validation, broadcasting and serialization of world tables."""

    def test_fixtures_load(self):
        self.assertEqual(available_fixtures(), ["brake_pad", "confounded_two_step", "deterministic_two_step"])
        self.assertEqual(confounded_world().horizon, 2)
        with self.assertRaises(ValidationError):
            load_fixture("missing")

    def test_broadcast_tables(self):
        w = deterministic_world()
        self.assertEqual(w.dynamics[1].shape, (2, 2, 2, 2, 2, 2))
        self.assertEqual(w.policy[0].shape, (2, 2, 2))

    def test_rejects_bad_rows(self):
        data = brake_pad_world().to_dict()
        data["policy"] = [[[[0.2, 0.9]], [[0.9, 0.1]]]]
        with self.assertRaises(ValidationError):
            DiscreteWorld.from_dict(data)
        data = brake_pad_world().to_dict()
        data["dynamics"] = [[[0.5, 0.5]]]
        with self.assertRaises(ValidationError):
            DiscreteWorld.from_dict(data)

    def test_file_round_trip(self):
        w = random_world(3)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "w.json"
            w.dump(str(path))
            loaded = DiscreteWorld.from_file(str(path))
        np.testing.assert_allclose(loaded.factual_joint(), w.factual_joint())
        spec = random_spec(w, np.random.default_rng(0))
        self.assertEqual(exact_bounds_oracle(loaded, spec), exact_bounds_oracle(w, spec))

    def test_laws_are_normalized(self):
        w = random_world(11, horizon=3)
        self.assertAlmostEqual(w.observational_law().sum(), 1.0)
        self.assertAlmostEqual(w.interventional_joint((1, 0, 1)).sum(), 1.0)
        self.assertAlmostEqual(w.posterior(0).sum(), 1.0)

    def test_interventional_action_range(self):
        with self.assertRaises(ValidationError):
            brake_pad_world().interventional_joint((2,))

    def test_positivity(self):
        w = brake_pad_world()
        region = RegionPredicate(((), (IntervalConstraint("stopped", 2.0, 3.0),)))
        with self.assertRaises(PositivityError):
            interventional_mean(w, world_spec(w, (AGGRESSIVE,), region))


class TestOracle(unittest.TestCase):
    """Exact bounds on random enumerable worlds."""

    def test_sandwich_on_random_worlds(self):
        violations = 0
        for seed in range(200):
            w = random_world(seed, horizon=1 + seed % 3)
            spec = random_spec(w, np.random.default_rng(seed))
            q, q_lo, q_up = exact_bounds_oracle(w, spec)
            if not q_lo - 1e-12 <= q <= q_up + 1e-12:
                violations += 1
        self.assertEqual(violations, 0)

    def test_deterministic_outcomes_are_identified(self):
        w = deterministic_world()
        for x0 in (0.0, 1.0):
            for actions in ((0,), (1,), (0, 1), (1, 1)):
                steps = ((MembershipConstraint("x0", frozenset({x0})),),) + tuple(() for _ in actions)
                spec = world_spec(w, actions, RegionPredicate(steps))
                q = interventional_mean(w, spec)
                self.assertAlmostEqual(q, observational_conditional_mean(w, spec))
                self.assertAlmostEqual(q, float((int(x0) + sum(actions)) % 2))

    def test_naive_mean_lies_within_bounds(self):
        w = confounded_world()
        for actions in ((0,), (1,), (0, 1), (1, 1)):
            spec = world_spec(w, actions)
            _, q_lo, q_up = exact_bounds_oracle(w, spec)
            naive = observational_conditional_mean(w, spec)
            self.assertTrue(q_lo - 1e-12 <= naive <= q_up + 1e-12)


class TestSharpness(unittest.TestCase):
    """Observationally equivalent worlds attaining the bounds."""

    def check_pair(self, w, spec):
        _, q_lo, q_up = exact_bounds_oracle(w, spec)
        w_lo, w_up = nonidentifiability_pair(w, spec.actions, spec)
        for other in (w_lo, w_up):
            diff = np.max(np.abs(other.observational_law() - w.observational_law()))
            self.assertLessEqual(diff, 1e-12)
        q_a, q_b = interventional_mean(w_lo, spec), interventional_mean(w_up, spec)
        self.assertAlmostEqual(q_a, q_lo, delta=1e-12)
        self.assertAlmostEqual(q_b, q_up, delta=1e-12)
        self.assertGreaterEqual(q_b - q_a, q_up - q_lo - 1e-12)

    def test_brake_pad(self):
        w = brake_pad_world()
        self.check_pair(w, world_spec(w, (AGGRESSIVE,)))
        w_lo, w_up = nonidentifiability_pair(w, (AGGRESSIVE,))
        self.assertAlmostEqual(interventional_mean(w_up, world_spec(w, (AGGRESSIVE,))), 0.95)

    def test_random_worlds(self):
        for seed in range(10):
            w = random_world(100 + seed, horizon=1 + seed % 3)
            rng = np.random.default_rng(seed)
            spec = random_spec(w, rng)
            self.check_pair(w, spec)

    def test_other_sequences_are_rejected(self):
        w = random_world(5)
        w_lo, _ = nonidentifiability_pair(w, (1, 0))
        w_lo.interventional_joint((1,))
        w_lo.interventional_joint((0, 1))
        with self.assertRaises(ValidationError):
            w_lo.interventional_joint((1, 1))

    def test_overrides_for_sibling_sequences(self):
        w = random_world(5)
        both = replace(w, overrides={(1, 0): (0, 2), (1, 1): (0, 1)})
        for target, atoms in (((1, 0), (0, 2)), ((1, 1), (0, 1))):
            alone = replace(w, overrides={target: atoms})
            np.testing.assert_allclose(both.interventional_joint(target), alone.interventional_joint(target))
        np.testing.assert_allclose(both.interventional_joint((0, 1)), w.interventional_joint((0, 1)))
        with self.assertRaises(ValidationError):
            replace(w, overrides={(1, 0): (0, 2)}).interventional_joint((1, 1))

    def test_unattainable_interval(self):
        w = brake_pad_world()
        spec = world_spec(w, (AGGRESSIVE,), y_lo=-1.0, y_up=2.0)
        with self.assertRaises(ValidationError):
            nonidentifiability_pair(w, (AGGRESSIVE,), spec)

    def test_always_agreeing_world(self):
        w = brake_pad_world(1.0, 1.0)
        with self.assertRaises(ValidationError):
            nonidentifiability_pair(w, (AGGRESSIVE,))


class TestSampling(unittest.TestCase):
    """Factual sampling from the enumerated joint."""

    def test_deterministic_and_valid(self):
        w = confounded_world()
        a = sample_observational(w, 500, seed=4)
        b = sample_observational(w, 500, seed=4)
        self.assertEqual(a.digest(), b.digest())
        self.assertEqual(a.x.shape, (500, 2, 1))
        self.assertEqual(len(sample_observational(w, 0)), 0)

    def test_deterministic_world_dynamics(self):
        d = sample_observational(deterministic_world(), 200, seed=0)
        x1 = d.x[:, 0, 0]
        np.testing.assert_array_equal(x1, np.logical_xor(d.x0[:, 0], d.actions[:, 0]).astype(float))


class TestSamplePopulationAgreementMonteCarlo(unittest.TestCase):
    """Empirical mu_lo, mu_up against the oracle on large samples."""

    @monte_carlo
    def test_agreement(self):
        for seed in range(20):
            w = random_world(1000 + seed)
            spec = random_spec(w, np.random.default_rng(seed))
            _, q_lo, q_up = exact_bounds_oracle(w, spec)
            d = sample_observational(w, 50_000, seed=seed)
            s = summarize_observational(d, spec)
            assert_tightness(self, s, spec)
            se = max(spec.outcome.y_range, 1e-9) / np.sqrt(s.n)
            self.assertLessEqual(abs(s.mu_lo - q_lo), 3 * se + 1e-12, f"world {seed}")
            self.assertLessEqual(abs(s.mu_up - q_up), 3 * se + 1e-12, f"world {seed}")


if __name__ == '__main__':
    unittest.main()
