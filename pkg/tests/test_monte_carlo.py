"""Seeded Monte Carlo checks of coverage, soundness and power.

Skipped with TWINFALSIFY_FAST_TESTS=1.
"""

import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from twinfalsify.bounds import summarize_observational
from twinfalsify.config import AssessmentConfig
from twinfalsify.runtime import AssessmentState, Runtime, sensitivity_sweep
from twinfalsify.stats.bootstrap import bootstrap_bound
from twinfalsify.stats.falsification import test_hypothesis as run_hypothesis_test
from twinfalsify.stats.hoeffding import hoeffding_margin
from twinfalsify.twin import TwinDataset
from twinfalsify.worlds import (
    brake_pad_world,
    confounded_world,
    exact_bounds_oracle,
    random_world,
    sample_observational,
    world_spec,
)
from twinfalsify.worlds.fixtures import AGGRESSIVE

from tests.helpers import monte_carlo

# keeps the bootstrap interval diagnostics out of Hoeffding runs
NO_DIAGNOSTICS = 10 ** 9


def interventional_twin(w, actions, m, seed):
    """m paths (X0, X(a)) drawn from the world's interventional law"""
    actions = tuple(actions)
    law = w.interventional_joint(actions).sum(axis=0)
    flat = law.ravel() / law.sum()
    cells = np.random.default_rng(seed).choice(flat.size, size=m, p=flat)
    idx = np.unravel_index(cells, law.shape)
    x = np.stack([w.obs_values[s][idx[s + 1]] for s in range(len(actions))], axis=1)
    return TwinDataset(actions, w.schema, w.x0_values[idx[0]], x)


def constant_twin(w, actions, m, value):
    x = np.full((m, len(actions), len(w.step_features)), value, dtype=float)
    return TwinDataset(actions, w.schema, np.zeros((m, len(w.x0_features))), x)


def floor_rate(p: float, reps: int) -> float:
    """p minus three binomial standard errors"""
    return p - 3 * math.sqrt(p * (1 - p) / reps)


class TestHoeffdingCoverageMonteCarlo(unittest.TestCase):
    """One-sided Hoeffding bounds cover the population bounds."""

    @monte_carlo
    def test_coverage(self):
        reps, n = 1000, 500
        for w in (brake_pad_world(), confounded_world()):
            spec = world_spec(w, (1,) * w.horizon)
            q, q_lo, q_up = exact_bounds_oracle(w, spec)
            r = spec.outcome.y_range
            covered = {alpha: np.zeros(4) for alpha in (0.05, 0.1)}
            for rep in range(reps):
                s = summarize_observational(sample_observational(w, n, seed=rep), spec)
                mu_hat = float(interventional_twin(w, spec.actions, n, seed=10_000 + rep).x[:, -1, 0].mean())
                for alpha in covered:
                    margin = hoeffding_margin(n, r, alpha)
                    covered[alpha] += [q_lo >= s.mu_lo - margin, q_up <= s.mu_up + margin,
                                       q >= mu_hat - margin, q <= mu_hat + margin]
            for alpha, hits in covered.items():
                for rate in hits / reps:
                    self.assertGreaterEqual(rate, floor_rate(1 - alpha / 2, reps), f"{w.name} alpha={alpha}")


class TestSoundnessMonteCarlo(unittest.TestCase):
    """A correct twin is rarely rejected, however strong the confounding."""

    @monte_carlo
    def test_correct_twin(self):
        reps, n, alpha = 2000, 2000, 0.05
        for w in (brake_pad_world(), brake_pad_world(0.99, 0.01), confounded_world(), random_world(7)):
            spec = world_spec(w, (1,) * w.horizon)
            rejected = np.zeros(2)
            for rep in range(reps):
                obs = sample_observational(w, n, seed=rep)
                twin = interventional_twin(w, spec.actions, n, seed=50_000 + rep)
                outcome = run_hypothesis_test(obs, twin, spec, alpha=alpha, min_bootstrap_n=NO_DIAGNOSTICS)
                rejected += [outcome.reject_lo, outcome.reject_up]
            for rate in rejected / reps:
                self.assertLessEqual(rate, alpha + 3 * math.sqrt(alpha * (1 - alpha) / reps), w.name)


class TestPowerMonteCarlo(unittest.TestCase):
    """A twin simulating only new pads is falsified on the high-propensity world."""

    def setUp(self):
        self.w = brake_pad_world(0.99, 0.9)
        self.spec = world_spec(self.w, (AGGRESSIVE,))
        self.twin = constant_twin(self.w, (AGGRESSIVE,), 5000, 1.0)

    @monte_carlo
    def test_hoeffding(self):
        reps = 1000
        rejected = sum(
            run_hypothesis_test(sample_observational(self.w, 5000, seed=rep), self.twin, self.spec,
                                min_bootstrap_n=NO_DIAGNOSTICS).reject_up
            for rep in range(reps)
        )
        self.assertGreaterEqual(rejected / reps, 0.90)

    @monte_carlo
    def test_bootstrap(self):
        reps = 1000
        rejected = sum(
            run_hypothesis_test(sample_observational(self.w, 5000, seed=rep), self.twin, self.spec,
                                method="bootstrap", seed=rep).reject_up
            for rep in range(reps)
        )
        self.assertGreaterEqual(rejected / reps, 0.95)


class TestBootstrapCoverageMonteCarlo(unittest.TestCase):
    """Reverse percentile bounds at nominal 95% on bounded samples."""

    @monte_carlo
    def test_coverage(self):
        reps, n = 500, 500
        rng = np.random.default_rng(0)
        mean = 2 / 7
        lower = upper = 0
        for rep in range(reps):
            samples = rng.beta(2, 5, size=n)
            lower += bootstrap_bound(samples, 0.1, "lower", 100, seed=rep) <= mean
            upper += bootstrap_bound(samples, 0.1, "upper", 100, seed=rep) >= mean
        self.assertGreaterEqual(lower / reps, 0.85)
        self.assertGreaterEqual(upper / reps, 0.85)


class TestSweepMonteCarlo(unittest.TestCase):
    """Widening every interval never adds rejections."""

    @monte_carlo
    def test_monotone_in_delta(self):
        deltas = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
        w = brake_pad_world(0.99, 0.9)
        specs = [world_spec(w, (a,), spec_id=f"H{a:05d}") for a in (0, 1)]
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "world.json"
            w.dump(str(path))
            for seed in range(10):
                runtime = Runtime(AssessmentConfig(world=str(path), world_samples=2000, twin="stratum", seed=seed))
                state = runtime.run_stages(AssessmentState(specs=list(specs)), until="twin_data")
                rows = sensitivity_sweep(runtime, deltas, state)
                self.assertEqual(rows[0]["rejected"], ["H00001"])
                for wider, narrower in zip(rows[1:], rows):
                    self.assertLessEqual(set(wider["rejected"]), set(narrower["rejected"]), f"seed {seed}")
                self.assertEqual(rows[-1]["rejections"], 0)


if __name__ == '__main__':
    unittest.main()
