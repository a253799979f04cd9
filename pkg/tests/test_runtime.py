"""Test suite for the twinfalsify runtime."""

import json
import os
import tempfile
import unittest
from dataclasses import replace
from pathlib import Path
from unittest import mock

import numpy as np

from twinfalsify.config import AssessmentConfig
from twinfalsify.errors import StageError, ValidationError
from twinfalsify.hypothesis import IntervalConstraint, RegionPredicate
from twinfalsify.runtime import (
    AssessmentState,
    Runtime,
    apply_holm,
    derive_seed,
    longitudinal_comparison,
    prefix_family,
    sensitivity_sweep,
    sweep_assessment,
)
from twinfalsify.runtime.sweep import rescale_specs
from twinfalsify.stats.multiplicity import holm_bonferroni
from twinfalsify.twin import TwinDataset, builtin_twin, generate_twin_dataset
from twinfalsify.worlds import brake_pad_world, random_world, sample_observational, world_spec
from twinfalsify.worlds.fixtures import AGGRESSIVE, GENTLE


def brake_specs(w):
    return [world_spec(w, (a,), spec_id=f"H{a:05d}") for a in (GENTLE, AGGRESSIVE)]


class RuntimeTestCase(unittest.TestCase):
    """Runs on a braking world where most drivers brake aggressively."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.w = brake_pad_world(0.99, 0.9)
        self.world_path = Path(self.tmp.name) / "world.json"
        self.w.dump(str(self.world_path))
        self.specs = brake_specs(self.w)

    def tearDown(self):
        self.tmp.cleanup()

    def runtime(self, **overrides):
        config = AssessmentConfig(world=str(self.world_path), world_samples=1000, **overrides)
        return Runtime(config)


class TestAssessmentConfig(unittest.TestCase):
    """Config validation, files and overrides."""

    def test_defaults(self):
        config = AssessmentConfig()
        self.assertEqual(config.method, "hoeffding")
        self.assertEqual(config.alpha, 0.05)
        self.assertEqual(config.held_out_fraction, 0.05)
        self.assertEqual((config.q_lo, config.q_up), (0.2, 0.8))

    def test_invalid_values(self):
        for kwargs in ({"method": "t-test"}, {"alpha": 1.0}, {"fwer": 0.0}, {"q_lo": 0.9},
                       {"held_out_fraction": 1.5}, {"workers": 0}, {"holm_family": "none"}):
            with self.assertRaises(ValidationError):
                AssessmentConfig(**kwargs)

    def test_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "config.json"
            path.write_text(json.dumps({"method": "bootstrap", "seed": 3}), encoding="utf-8")
            config = AssessmentConfig.from_file(str(path))
            self.assertEqual((config.method, config.seed), ("bootstrap", 3))
            path.write_text(json.dumps({"mehtod": "bootstrap"}), encoding="utf-8")
            with self.assertRaises(ValidationError):
                AssessmentConfig.from_file(str(path))
            with self.assertRaises(ValidationError):
                AssessmentConfig.from_file(str(Path(tmp) / "missing.json"))

    def test_timeout_from_environment(self):
        with mock.patch.dict(os.environ, {"TWINFALSIFY_TWIN_TIMEOUT": "2.5"}):
            self.assertEqual(AssessmentConfig().twin_timeout, 2.5)
        with mock.patch.dict(os.environ, {"TWINFALSIFY_TWIN_TIMEOUT": "soon"}):
            self.assertEqual(AssessmentConfig().twin_timeout, 30.0)


class TestRuntime(RuntimeTestCase):
    """Test the runtime component."""

    def test_register_twin(self):
        runtime = Runtime()
        twin = builtin_twin(self.w, "stratum")
        runtime.register_twin("pads", twin)
        self.assertIs(runtime.twins["pads"], twin)
        runtime.update_config(twin="pads")
        self.assertIs(runtime.resolve_twin(self.w.schema), twin)

    def test_update_config(self):
        runtime = Runtime()
        runtime.update_config(alpha=0.01, seed=None)
        self.assertEqual(runtime.config.alpha, 0.01)
        self.assertEqual(runtime.config.seed, 0)
        with self.assertRaises(ValidationError):
            runtime.update_config(alpha=2.0)
        with self.assertRaises(ValidationError):
            runtime.update_config(colour="blue")

    def test_resolve_twin_errors(self):
        with self.assertRaises(ValidationError):
            Runtime(AssessmentConfig(twin="correct")).resolve_twin(self.w.schema)
        with self.assertRaises(ValidationError):
            Runtime(AssessmentConfig(twin="external")).resolve_twin(self.w.schema)
        with self.assertRaises(ValidationError):
            Runtime(AssessmentConfig(twin="oracle")).resolve_twin(self.w.schema, self.w)

    def test_derive_seed(self):
        self.assertEqual(derive_seed(0, 1, 2), derive_seed(0, 1, 2))
        self.assertNotEqual(derive_seed(0, 1, 2), derive_seed(0, 1, 3))
        self.assertNotEqual(derive_seed(0, 2, 0), derive_seed(1, 2, 0))

    def test_correct_twin_is_not_falsified(self):
        runtime = Runtime(AssessmentConfig(world="brake_pad", world_samples=2000))
        report = runtime.run_assessment(specs=brake_specs(brake_pad_world()))
        self.assertEqual(report.rejections, 0)
        self.assertEqual(report.table, [{"quantity": "stopped", "hypotheses": 2, "rejections": 0,
                                         "rejections_lo": 0, "rejections_up": 0, "skipped": 0}])

    def test_stratum_twin_is_falsified(self):
        report = self.runtime(twin="stratum").run_assessment(specs=self.specs)
        self.assertEqual(report.rejections, 1)
        self.assertEqual(report.table, [{"quantity": "stopped", "hypotheses": 2, "rejections": 1,
                                         "rejections_lo": 0, "rejections_up": 1, "skipped": 0}])
        aggressive = [o for o in report.outcomes if o.spec.actions == (AGGRESSIVE,)][0]
        self.assertTrue(aggressive.holm_reject_up)
        self.assertAlmostEqual(aggressive.twin.mu_hat, 1.0)
        data = report.to_dict()
        self.assertEqual([h["id"] for h in data["histograms"]], ["H00001"])
        self.assertEqual(data["metadata"]["n_rejections"], 1)
        self.assertEqual(data["metadata"]["twin"], ["builtin:brake_pad:stratum(0)"])

    def test_runs_are_reproducible(self):
        a = self.runtime(twin="stratum", seed=4).run_assessment(specs=self.specs).to_json()
        b = self.runtime(twin="stratum", seed=4).run_assessment(specs=self.specs).to_json()
        c = self.runtime(twin="stratum", seed=5).run_assessment(specs=self.specs).to_json()
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)

    def test_workers_do_not_change_results(self):
        a = self.runtime(twin="correct").run_assessment(specs=self.specs).to_json()
        b = self.runtime(twin="correct", workers=3).run_assessment(specs=self.specs).to_json()
        self.assertEqual(a, b)

    def test_empty_hypothesis_set(self):
        report = self.runtime().run_assessment(specs=[])
        self.assertEqual(report.outcomes, [])
        self.assertEqual(report.table, [])
        self.assertEqual(report.to_csv(), ",".join(
            ["quantity", "hypotheses", "rejections", "rejections_lo", "rejections_up", "skipped"]) + "\n")
        self.assertEqual(json.loads(report.to_json())["metadata"]["n_hypotheses"], 0)

    def test_given_dataset_and_twin(self):
        d = sample_observational(self.w, 800, seed=9)
        report = Runtime().run_assessment(dataset=d, specs=self.specs, twin=builtin_twin(self.w, "stratum"))
        self.assertEqual(report.rejections, 1)
        self.assertEqual(report.metadata["digests"]["dataset"], d.digest())

    def test_stage_errors_carry_partial_report(self):
        with self.assertRaises(StageError) as ctx:
            Runtime().run_assessment()
        self.assertEqual(ctx.exception.stage, "ingest")
        self.assertIsInstance(ctx.exception.cause, ValidationError)

        with self.assertRaises(StageError) as ctx:
            self.runtime(twin="external").run_assessment(specs=self.specs)
        self.assertEqual(ctx.exception.stage, "twin_data")
        partial = ctx.exception.partial.to_dict()
        self.assertEqual(partial["failed_stage"], "twin_data")
        self.assertEqual(partial["metadata"]["n_hypotheses"], 2)
        self.assertIn("main", partial["metadata"]["digests"])

    def test_write_report(self):
        output = Path(self.tmp.name) / "report.json"
        self.runtime(twin="stratum", output=str(output)).run_assessment(specs=self.specs)
        data = json.loads(output.read_text(encoding="utf-8"))
        self.assertEqual(len(data["hypotheses"]), 2)
        lines = output.with_suffix(".csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "quantity,hypotheses,rejections,rejections_lo,rejections_up,skipped")
        self.assertEqual(lines[1], "stopped,2,1,0,1,0")


class TestMultiplicity(RuntimeTestCase):
    """Holm families over the outcomes of one run."""

    def setUp(self):
        super().setUp()
        specs = [replace(s, label=label, spec_id=f"{label}{s.spec_id}")
                 for s in self.specs for label in ("a", "b")]
        self.report = self.runtime(twin="stratum").run_assessment(specs=specs)
        self.outcomes = self.report.outcomes

    def test_joint_family(self):
        rejected = apply_holm(self.outcomes, 0.05, "joint")
        p = [o.p_lo for o in self.outcomes] + [o.p_up for o in self.outcomes]
        expected = holm_bonferroni(p, 0.05)
        self.assertEqual(rejected, expected.n_rejected)
        k = len(self.outcomes)
        for j, o in enumerate(self.outcomes):
            self.assertEqual(o.holm_reject_lo, bool(expected.rejected[j]))
            self.assertEqual(o.holm_reject_up, bool(expected.rejected[k + j]))

    def test_per_quantity_family(self):
        rejected = apply_holm(self.outcomes, 0.05, "per_quantity")
        total = 0
        for label in ("a", "b"):
            members = [o for o in self.outcomes if o.spec.label == label]
            expected = holm_bonferroni([o.p_lo for o in members] + [o.p_up for o in members], 0.05)
            total += expected.n_rejected
            self.assertEqual([o.holm_reject_up for o in members],
                             [bool(r) for r in expected.rejected[len(members):]])
        self.assertEqual(rejected, total)

    def test_table_invariants(self):
        table = self.report.table
        self.assertEqual([row["quantity"] for row in table], ["a", "b"])
        self.assertEqual(sum(row["hypotheses"] for row in table), sum(o.tested for o in self.outcomes))
        for row in table:
            self.assertLessEqual(row["rejections"], row["hypotheses"])
            self.assertLessEqual(row["rejections"], row["rejections_lo"] + row["rejections_up"])
            self.assertEqual(row["rejections_up"], 1)


class TestLongitudinal(RuntimeTestCase):
    """Naive and causal series for one action sequence."""

    def setUp(self):
        super().setUp()
        self.d = sample_observational(self.w, 1000, seed=2)
        self.spec = self.specs[AGGRESSIVE]

    def test_twin_built_from_agreeing_rows_matches_naive_mean(self):
        agree = self.d.actions[:, 0] == AGGRESSIVE
        twin = TwinDataset((AGGRESSIVE,), self.d.schema, self.d.x0[agree], self.d.x[agree])
        [entry] = longitudinal_comparison(self.d, twin, [self.spec])
        self.assertFalse(entry["absent"])
        self.assertEqual(entry["twin"]["estimate"], entry["observational"]["estimate"])
        self.assertEqual(entry["twin"]["n"], entry["n_agree"])
        self.assertFalse(entry["falsified_lo"] or entry["falsified_up"])
        self.assertLess(entry["q_lo"], entry["q_up"])

    def test_stratum_twin_exceeds_upper_bound(self):
        twin = generate_twin_dataset(self.d, (AGGRESSIVE,), builtin_twin(self.w, "stratum"), 500, seed=1)
        [entry] = longitudinal_comparison(self.d, twin, [self.spec])
        self.assertTrue(entry["falsified_up"])
        self.assertFalse(entry["falsified_lo"])
        self.assertEqual(entry["twin"]["estimate"], 1.0)

    def test_empty_conditioning_set_is_marked_absent(self):
        region = RegionPredicate(((), (IntervalConstraint("stopped", 5.0, 6.0),)))
        spec = world_spec(self.w, (AGGRESSIVE,), region)
        twin = generate_twin_dataset(self.d, (AGGRESSIVE,), builtin_twin(self.w), 100, seed=1)
        [entry] = longitudinal_comparison(self.d, twin, [spec])
        self.assertTrue(entry["absent"])
        self.assertNotIn("twin", entry)

    def test_invalid_arguments(self):
        twin = generate_twin_dataset(self.d, (AGGRESSIVE,), builtin_twin(self.w), 10)
        with self.assertRaises(ValidationError):
            longitudinal_comparison(self.d, twin, [self.spec], alpha=0.7)
        with self.assertRaises(ValidationError):
            longitudinal_comparison(self.d, twin, [])
        with self.assertRaises(ValidationError):
            longitudinal_comparison(self.d, twin, [self.spec, self.specs[GENTLE]])


class TestLongitudinalFamily(unittest.TestCase):
    """Series over t = 1..3 on a three-step world."""

    def setUp(self):
        self.w = random_world(21, horizon=3)
        self.actions = (1, 0, 1)
        self.d = sample_observational(self.w, 4000, seed=0)
        self.twin = generate_twin_dataset(self.d, self.actions, builtin_twin(self.w), 2000, seed=3)

    def test_prefix_family(self):
        family = prefix_family(world_spec(self.w, self.actions, spec_id="L"))
        self.assertEqual([s.t for s in family], [1, 2, 3])
        self.assertEqual([s.spec_id for s in family], ["L@t1", "L@t2", "L"])
        self.assertEqual(family[1].actions, (1, 0))
        self.assertEqual(family[1].region.t, 2)
        self.assertEqual(family[0].outcome.t, 1)

    def test_series_covers_every_timestep(self):
        series = longitudinal_comparison(self.d, self.twin, prefix_family(world_spec(self.w, self.actions)))
        self.assertEqual([e["t"] for e in series], [1, 2, 3])
        self.assertFalse(any(e["absent"] for e in series))
        self.assertEqual([e["n"] for e in series], [4000] * 3)
        self.assertEqual([e["n_hat"] for e in series], [2000] * 3)
        agreeing = [e["n_agree"] for e in series]
        self.assertEqual(agreeing, sorted(agreeing, reverse=True))
        for entry in series:
            self.assertLessEqual(entry["q_lo"], entry["q_up"])

    def test_empty_last_timestep_is_marked_absent(self):
        region = RegionPredicate(((), (), (), (IntervalConstraint("y", 5.0, 6.0),)))
        series = longitudinal_comparison(self.d, self.twin, prefix_family(world_spec(self.w, self.actions, region)))
        self.assertEqual([e["t"] for e in series], [1, 2, 3])
        self.assertEqual([e["absent"] for e in series], [False, False, True])
        self.assertEqual(series[2]["n_agree"], 0)
        self.assertNotIn("twin", series[2])


class TestReportSections(RuntimeTestCase):
    """Longitudinal series and sweep rows reach the report."""

    def test_rejected_hypotheses_get_a_series(self):
        report = self.runtime(twin="stratum").run_assessment(specs=self.specs)
        [entry] = report.longitudinal
        self.assertEqual(entry["id"], "H00001")
        self.assertEqual(entry["actions"], [AGGRESSIVE])
        self.assertTrue(entry["series"][0]["falsified_up"])
        self.assertEqual(report.to_dict()["longitudinal"], report.longitudinal)

    def test_longitudinal_modes(self):
        report = self.runtime(twin="stratum", longitudinal="all").run_assessment(specs=self.specs)
        self.assertEqual([e["id"] for e in report.longitudinal], ["H00000", "H00001"])
        report = self.runtime(twin="stratum", longitudinal="none").run_assessment(specs=self.specs)
        self.assertEqual(report.longitudinal, [])
        with self.assertRaises(ValidationError):
            AssessmentConfig(longitudinal="some")

    def test_sweep_rows_are_written_with_the_report(self):
        path = Path(self.tmp.name) / "sweep.json"
        runtime = self.runtime(twin="stratum", output=str(path))
        report = sweep_assessment(runtime, [0.0, 0.5], specs=self.specs)
        self.assertEqual([row["delta"] for row in report.sweep], [0.0, 0.5])
        data = json.loads(path.read_text(encoding="utf-8"))
        self.assertEqual(data["sweep"][0]["rejected"], ["H00001"])
        self.assertEqual(len(data["sweep"]), 2)
        self.assertTrue(data["longitudinal"])


class TestSensitivitySweep(RuntimeTestCase):
    """Rejections as [y_lo, y_up] widens and narrows."""

    def test_zero_delta_reproduces_the_run(self):
        runtime = self.runtime(twin="stratum")
        base = runtime.run_assessment(specs=self.specs)
        state = runtime.run_stages(AssessmentState(specs=list(self.specs)), until="twin_data")
        rows = sensitivity_sweep(runtime, [0.0, 0.5, -2.0], state)
        expected = sorted(o.spec.spec_id for o in base.outcomes if o.holm_reject_lo or o.holm_reject_up)
        self.assertEqual(rows[0]["rejected"], expected)
        self.assertEqual(rows[0]["rejections"], base.rejections)
        self.assertLessEqual(rows[1]["rejections"], rows[0]["rejections"])
        self.assertTrue(rows[2]["skipped"])
        self.assertIn("collapsed", rows[2]["reason"])

    def test_inverted_interval(self):
        spec = self.specs[GENTLE].with_interval(0.5, 1.0)
        scaled, reason = rescale_specs([spec], -1.8)
        self.assertIsNone(scaled)
        self.assertIn("inverted", reason)
        scaled, _ = rescale_specs([spec], 1.0)
        self.assertEqual((scaled[0].outcome.y_lo, scaled[0].outcome.y_up), (0.25, 1.5))


if __name__ == '__main__':
    unittest.main()
