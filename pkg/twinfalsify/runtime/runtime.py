"""Twinfalsify runtime - runs the assessment pipeline"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .longitudinal import longitudinal_comparison, prefix_family
from .report import AssessmentReport
from ..config import AssessmentConfig
from ..data.binning import ActionBinning, fit_action_binning
from ..data.dataset import TrajectoryDataset, load_dataset, split_dataset
from ..data.schema import FeatureSchema
from ..errors import StageError, ValidationError
from ..hypothesis.generator import generate_hypotheses
from ..hypothesis.spec import HypothesisSpec, load_hypotheses
from ..stats.falsification import TestOutcome, test_hypothesis
from ..stats.multiplicity import holm_bonferroni
from ..twin.builtin import MODES, builtin_twin
from ..twin.dataset import TwinDataset, load_twin_dataset, tag_name
from ..twin.external import SubprocessTwinFactory
from ..twin.generator import generate_twin_dataset
from ..twin.session import TwinFactory
from ..worlds.fixtures import load_fixture
from ..worlds.world import DiscreteWorld, sample_observational

logger = logging.getLogger(__name__)

def derive_seed(base: int, *keys: int) -> int:
    """Independent 32-bit seed for a sub-task of a seeded run"""
    return int(np.random.SeedSequence([base, *keys]).generate_state(1)[0])


def load_world(ref: str) -> DiscreteWorld:
    """World from a JSON file, or a shipped fixture by name"""
    if Path(ref).exists():
        return DiscreteWorld.from_file(ref)
    return load_fixture(ref)


def find_twin_data(twin_data: Dict[Tuple[int, ...], TwinDataset], actions: Sequence[int]) -> Optional[TwinDataset]:
    """Twin dataset generated for ``actions``, else the shortest one extending it"""
    actions = tuple(actions)
    if actions in twin_data:
        return twin_data[actions]
    extending = [tag for tag in twin_data if tag[:len(actions)] == actions]
    if not extending:
        return None
    return twin_data[min(extending, key=lambda tag: (len(tag), tag))]


def run_tests(d_main: TrajectoryDataset, twin_data: Dict[Tuple[int, ...], TwinDataset],
              specs: Sequence[HypothesisSpec], config: AssessmentConfig) -> List[TestOutcome]:
    """Test every spec; results are ordered by spec id whatever the worker count"""
    ordered = sorted(specs, key=lambda s: s.spec_id)

    def run(item: Tuple[int, HypothesisSpec]) -> TestOutcome:
        k, spec = item
        twin = find_twin_data(twin_data, spec.actions)
        if twin is None:
            raise ValidationError(f"No twin data for actions {list(spec.actions)} ({spec.spec_id})")
        return test_hypothesis(
            d_main, twin, spec,
            method=config.method,
            alpha=config.alpha,
            bootstrap_samples=config.bootstrap_samples,
            min_bootstrap_n=config.min_bootstrap_n,
            seed=derive_seed(config.seed, 2, k),
            bootstrap_variant=config.bootstrap_variant,
        )

    items = list(enumerate(ordered))
    if config.workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(run, items))
    return [run(item) for item in items]


def apply_holm(outcomes: List[TestOutcome], fwer: float, family: str = "joint") -> int:
    """Set the Holm flags of every outcome; skipped hypotheses enter with p = 1.

    Returns the number of rejected hypotheses (each side counts once).
    """
    if family == "joint":
        families = {"": list(range(len(outcomes)))}
    else:
        families = {}
        for i, outcome in enumerate(outcomes):
            families.setdefault(outcome.spec.label, []).append(i)

    rejected = 0
    for name, members in sorted(families.items()):
        p = [outcomes[i].p_lo for i in members] + [outcomes[i].p_up for i in members]
        if not p:
            continue
        result = holm_bonferroni(p, fwer)
        for j, i in enumerate(members):
            outcomes[i].holm_reject_lo = bool(result.rejected[j])
            outcomes[i].holm_reject_up = bool(result.rejected[len(members) + j])
        rejected += result.n_rejected
        if name:
            logger.debug(f"Holm family {name}: {result.n_rejected} of {len(p)} rejected")
    return rejected


@dataclass
class AssessmentState:
    """Everything the stages have produced so far"""
    dataset: Optional[TrajectoryDataset] = None
    held_out: Optional[TrajectoryDataset] = None
    main: Optional[TrajectoryDataset] = None
    binning: Optional[ActionBinning] = None
    world: Optional[DiscreteWorld] = None
    specs: Optional[List[HypothesisSpec]] = None
    twin: Optional[TwinFactory] = None
    twin_data: Dict[Tuple[int, ...], TwinDataset] = field(default_factory=dict)
    outcomes: List[TestOutcome] = field(default_factory=list)
    rejections: int = 0
    longitudinal: List[Dict[str, Any]] = field(default_factory=list)
    report: Optional[AssessmentReport] = None


class Runtime:
    """Runtime environment for falsification runs"""

    def __init__(self, config: Optional[AssessmentConfig] = None):
        self.config = config or AssessmentConfig()
        self.twins: Dict[str, TwinFactory] = {}
        self.last_state: Optional[AssessmentState] = None
        self.stages: List[Tuple[str, Callable[[AssessmentState], None]]] = [
            ("ingest", self._ingest),
            ("split", self._split),
            ("hypotheses", self._hypotheses),
            ("twin_data", self._twin_data),
            ("test", self._test),
            ("multiplicity", self._multiplicity),
            ("longitudinal", self._longitudinal),
            ("report", self._report),
        ]

    def register_twin(self, name: str, twin: TwinFactory):
        """Make a twin selectable through ``config.twin``"""
        self.twins[name] = twin
        logger.info(f"Registered twin: {name} ({twin.twin_id})")

    def update_config(self, **overrides):
        """Update runtime configuration"""
        self.config.update(**overrides)
        logger.info(f"Updated config: { {k: v for k, v in overrides.items() if v is not None} }")

    def world(self) -> Optional[DiscreteWorld]:
        return load_world(self.config.world) if self.config.world else None

    def resolve_twin(self, schema: FeatureSchema, world: Optional[DiscreteWorld] = None,
                     binning: Optional[ActionBinning] = None) -> TwinFactory:
        """Registered twin, built-in world twin or external process, by ``config.twin``"""
        name = self.config.twin
        if name in self.twins:
            return self.twins[name]
        if name in MODES:
            if world is None:
                raise ValidationError(f"Twin '{name}' simulates a world but no world was configured")
            return builtin_twin(world, name, self.config.twin_shift, self.config.twin_stratum)
        if name == "external":
            if not self.config.twin_command:
                raise ValidationError("External twin selected but twin_command is empty")
            return SubprocessTwinFactory(
                self.config.twin_command,
                workers=self.config.workers,
                timeout=self.config.twin_timeout,
                x0_dim=schema.x0_dim,
                x_dim=schema.step_dim,
                consumes_raw_doses=binning is not None,
            )
        raise ValidationError(f"Unknown twin: {name}")

    # stages

    def _ingest(self, state: AssessmentState):
        config = self.config
        if state.world is None:
            state.world = self.world()
        if state.dataset is not None:
            return
        if config.dataset:
            if not config.schema:
                raise ValidationError("A dataset path needs a schema path")
            state.dataset = load_dataset(config.dataset, FeatureSchema.from_file(config.schema))
        elif state.world is not None:
            state.dataset = sample_observational(state.world, config.world_samples, seed=derive_seed(config.seed, 0))
        else:
            raise ValidationError("Nothing to assess: configure a dataset or a world")
        logger.info(f"Ingested {len(state.dataset)} trajectories ({state.dataset.provenance})")

    def _split(self, state: AssessmentState):
        config = self.config
        state.held_out, state.main = split_dataset(state.dataset, config.held_out_fraction, config.seed)
        if config.raw_dose_columns:
            state.binning = fit_action_binning(state.held_out, config.raw_dose_columns)
            state.held_out = state.binning.apply(state.held_out)
            state.main = state.binning.apply(state.main)

    def _hypotheses(self, state: AssessmentState):
        config = self.config
        if state.specs is None and config.hypotheses:
            state.specs = load_hypotheses(config.hypotheses, state.main.schema)
        elif state.specs is None:
            quantities = config.quantities or ([state.world.outcome_feature] if state.world else [])
            if not quantities:
                raise ValidationError("No hypotheses file and no quantities to generate hypotheses for")
            state.specs = generate_hypotheses(
                state.held_out, quantities, config.q_lo, config.q_up,
                config.sex_feature, config.age_feature, config.median_split,
            )
        for spec in state.specs:
            spec.check(state.main.schema)
        degenerate = sum(spec.degenerate for spec in state.specs)
        if degenerate:
            logger.warning(f"{degenerate} hypotheses have a degenerate interval y_lo == y_up")
        logger.info(f"Assessing {len(state.specs)} hypotheses")

    def _twin_data(self, state: AssessmentState):
        config = self.config
        if config.twin_data_dir:
            for path in sorted(Path(config.twin_data_dir).glob("*.jsonl")):
                d = load_twin_dataset(str(path), state.main.schema)
                state.twin_data.setdefault(d.tag, d)
            return
        needed = sorted({spec.actions for spec in state.specs if find_twin_data(state.twin_data, spec.actions) is None})
        if not needed:
            return
        if state.twin is None:
            state.twin = self.resolve_twin(state.main.schema, state.world, state.binning)
        m = len(state.main) if config.twin_samples is None else min(config.twin_samples, len(state.main))
        for k, actions in enumerate(needed):
            state.twin_data[actions] = generate_twin_dataset(
                state.main, actions, state.twin, m,
                seed=derive_seed(config.seed, 1, k),
                binning=state.binning,
                workers=config.workers,
            )

    def _test(self, state: AssessmentState):
        state.outcomes = run_tests(state.main, state.twin_data, state.specs, self.config)
        tested = sum(o.tested for o in state.outcomes)
        logger.info(f"Tested {tested} of {len(state.outcomes)} hypotheses with {self.config.method}")

    def _multiplicity(self, state: AssessmentState):
        state.rejections = apply_holm(state.outcomes, self.config.fwer, self.config.holm_family)
        logger.info(f"Holm-Bonferroni at FWER {self.config.fwer}: {state.rejections} rejections")

    def _longitudinal(self, state: AssessmentState):
        mode = self.config.longitudinal
        if mode == "none":
            return
        chosen = [o for o in state.outcomes if mode == "all" or o.holm_reject_lo or o.holm_reject_up]
        state.longitudinal = []
        for outcome in chosen:
            spec = outcome.spec
            twin = find_twin_data(state.twin_data, spec.actions)
            series = longitudinal_comparison(state.main, twin, prefix_family(spec), min(self.config.alpha, 0.5))
            state.longitudinal.append({
                "id": spec.spec_id,
                "label": spec.label,
                "actions": list(spec.actions),
                "series": series,
            })
        logger.info(f"Longitudinal series for {len(state.longitudinal)} hypotheses ({mode})")

    def _report(self, state: AssessmentState):
        state.report = self._build_report(state)

    def _metadata(self, state: AssessmentState) -> Dict[str, Any]:
        config = self.config
        metadata: Dict[str, Any] = {
            "seed": config.seed,
            "method": config.method,
            "alpha": config.alpha,
            "fwer": config.fwer,
            "holm_family": config.holm_family,
        }
        if config.method == "bootstrap":
            metadata.update({
                "bootstrap_samples": config.bootstrap_samples,
                "min_bootstrap_n": config.min_bootstrap_n,
                "bootstrap_variant": config.bootstrap_variant,
            })
        digests = {}
        for name in ("dataset", "held_out", "main"):
            d = getattr(state, name)
            if d is not None:
                digests[name] = d.digest()
        if state.twin_data:
            digests["twin"] = {tag_name(tag): d.digest() for tag, d in sorted(state.twin_data.items())}
            metadata["twin"] = sorted({d.metadata.get("twin_id", "") for d in state.twin_data.values()})
        metadata["digests"] = digests
        if state.binning is not None:
            metadata["binning"] = state.binning.to_dict()
        if state.specs is not None:
            metadata["n_hypotheses"] = len(state.specs)
        if state.outcomes:
            metadata["n_tested"] = sum(o.tested for o in state.outcomes)
            metadata["n_rejections"] = state.rejections
        return metadata

    def _build_report(self, state: AssessmentState, stage: Optional[str] = None) -> AssessmentReport:
        return AssessmentReport(
            metadata=self._metadata(state),
            outcomes=state.outcomes,
            longitudinal=state.longitudinal,
            histogram_bins=self.config.histogram_bins,
            histogram_truncation=self.config.histogram_truncation,
            stage=stage,
        )

    def run_stages(self, state: AssessmentState, until: Optional[str] = None) -> AssessmentState:
        """Run the stages in order, stopping after ``until``"""
        for name, stage in self.stages:
            logger.debug(f"Stage {name}")
            try:
                stage(state)
            except Exception as e:
                logger.error(f"Stage {name} failed: {e}")
                raise StageError(name, e, partial=self._build_report(state, stage=name)) from e
            if name == until:
                break
        return state

    def run_assessment(self, dataset: Optional[TrajectoryDataset] = None,
                       specs: Optional[List[HypothesisSpec]] = None,
                       twin: Optional[TwinFactory] = None,
                       twin_data: Optional[Dict[Tuple[int, ...], TwinDataset]] = None,
                       write: bool = True) -> AssessmentReport:
        """
        Run ingest, split, hypotheses, twin data, test, multiplicity, longitudinal and report.

        Args:
            dataset: Observational dataset (otherwise read or sampled per config)
            specs: Hypotheses (otherwise loaded or generated per config)
            twin: Twin factory (otherwise resolved from ``config.twin``)
            twin_data: Pre-generated twin datasets keyed by action tag
            write: Write the report to ``config.output`` when set

        Returns:
            AssessmentReport

        Raises:
            StageError: with the failing stage and the partial report
        """
        state = AssessmentState(dataset=dataset, specs=list(specs) if specs is not None else None,
                                twin=twin, twin_data=dict(twin_data or {}))
        self.last_state = state
        owns_twin = twin is None
        try:
            self.run_stages(state)
        finally:
            if owns_twin and state.twin is not None and state.twin not in self.twins.values():
                state.twin.close()
        if write and self.config.output:
            state.report.write(self.config.output)
        return state.report
