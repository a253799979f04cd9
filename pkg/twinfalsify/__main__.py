"""twinfalsify CLI entry point"""

import sys
import csv
import json
import shlex
import logging
import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .config import (
    AssessmentConfig, BOOTSTRAP_VARIANTS, HOLM_FAMILIES, LONGITUDINAL_MODES, MEDIAN_SPLITS, METHODS, default_log_level,
)
from .data.binning import ActionBinning, fit_action_binning
from .data.dataset import dump_dataset, load_dataset, split_dataset
from .data.schema import FeatureSchema
from .errors import StageError, TwinError, ValidationError
from .hypothesis.generator import generate_hypotheses
from .hypothesis.spec import dump_hypotheses
from .runtime import Runtime, derive_seed, sweep_assessment
from .twin.dataset import dump_twin_dataset, tag_name
from .twin.generator import generate_twin_dataset
from .worlds.constructions import world_spec
from .worlds.fixtures import brake_pad_world

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION, EXIT_STAGE = 0, 1, 2, 3

DEMO_TWINS = ("correct", "propensity_blind", "stratum")
DEMO_WORLD_SAMPLES = 20_000


def setup_logging(level=logging.INFO):
    """Configure logging"""
    logging.basicConfig(
        level=level,
        format='%(asctime)s [%(levelname)s] %(name)s: %(message)s',
        datefmt='%H:%M:%S'
    )


def _emit(data: Any):
    print(json.dumps(data, sort_keys=True, indent=1))


def _require(value: Optional[str], flag: str) -> str:
    if not value:
        raise ValidationError(f"{flag} is required for this command")
    return value


def _load(config: AssessmentConfig):
    schema = FeatureSchema.from_file(_require(config.schema, "--schema"))
    return load_dataset(_require(config.dataset, "--dataset"), schema)


def _write_json(path: Path, data: Any):
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _parse_actions(text: str) -> List[int]:
    try:
        return [int(a) for a in text.replace(",", "-").split("-")]
    except ValueError:
        raise ValidationError(f"Invalid action sequence '{text}', expected e.g. 1-0-2")


def cmd_ingest(config: AssessmentConfig, args) -> int:
    d = _load(config)
    if config.output:
        dump_dataset(d, config.output)
    _emit({"n": len(d), "horizon": d.schema.horizon, "digest": d.digest()})
    return EXIT_OK


def cmd_split(config: AssessmentConfig, args) -> int:
    d = _load(config)
    held_out, main = split_dataset(d, config.held_out_fraction, config.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_dataset(held_out, str(out / "held_out.jsonl"))
    dump_dataset(main, str(out / "main.jsonl"))
    _emit({"held_out": len(held_out), "main": len(main)})
    return EXIT_OK


def cmd_bin_actions(config: AssessmentConfig, args) -> int:
    if not config.raw_dose_columns:
        raise ValidationError("--raw-dose-columns is required for bin-actions")
    d = _load(config)
    binning = fit_action_binning(d, config.raw_dose_columns)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    binning.dump(str(out / "binning.json"))
    for name in args.apply or []:
        binned = binning.apply(load_dataset(name, d.schema))
        dump_dataset(binned, str(out / Path(name).name))
        _write_json(out / "schema.json", binned.schema.to_dict())
    _emit(binning.to_dict())
    return EXIT_OK


def cmd_gen_hypotheses(config: AssessmentConfig, args) -> int:
    if not config.quantities:
        raise ValidationError("--quantities is required for gen-hypotheses")
    specs = generate_hypotheses(
        _load(config), config.quantities, config.q_lo, config.q_up,
        config.sex_feature, config.age_feature, config.median_split,
    )
    dump_hypotheses(specs, _require(config.output, "--output"))
    _emit({"hypotheses": len(specs)})
    return EXIT_OK


def cmd_gen_twin_data(config: AssessmentConfig, args) -> int:
    d = _load(config)
    runtime = Runtime(config)
    binning = None
    if args.binning:
        binning = ActionBinning.from_dict(json.loads(Path(args.binning).read_text(encoding="utf-8")))
    twin = runtime.resolve_twin(d.schema, runtime.world(), binning)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = len(d) if config.twin_samples is None else min(config.twin_samples, len(d))
    written = {}
    try:
        for k, text in enumerate(args.actions):
            actions = _parse_actions(text)
            twin_data = generate_twin_dataset(
                d, actions, twin, m, seed=derive_seed(config.seed, 1, k), binning=binning, workers=config.workers,
            )
            path = out / f"twin_{tag_name(actions)}.jsonl"
            dump_twin_dataset(twin_data, str(path))
            written[tag_name(actions)] = str(path)
    finally:
        twin.close()
    _emit(written)
    return EXIT_OK


def cmd_test(config: AssessmentConfig, args) -> int:
    report = Runtime(config).run_assessment()
    sys.stdout.write(report.to_csv())
    return EXIT_OK


def cmd_report(config: AssessmentConfig, args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ValidationError(f"Report not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        table = data["table"]
    except (json.JSONDecodeError, KeyError) as e:
        raise ValidationError(f"Invalid report {path}: {e}")
    if args.section == "table":
        if table:
            writer = csv.DictWriter(sys.stdout, fieldnames=list(table[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(table)
    else:
        _emit(data.get(args.section))
    return EXIT_OK


def cmd_sweep(config: AssessmentConfig, args) -> int:
    report = sweep_assessment(Runtime(config), args.deltas)
    _emit(report.sweep)
    return EXIT_OK


def run_demo(config: AssessmentConfig, out_dir: Optional[str] = None,
             world_samples: int = DEMO_WORLD_SAMPLES) -> Dict[str, Any]:
    """Brake-pad world assessed with a correct and two incorrect built-in twins"""
    world = brake_pad_world()
    specs = [world_spec(world, (a,), spec_id=f"H{a:05d}") for a in range(2)]
    summary: Dict[str, Any] = {}
    for mode in DEMO_TWINS:
        run_config = AssessmentConfig.from_dict({**config.to_dict(), "world": "brake_pad", "twin": mode,
                                                "world_samples": world_samples})
        run_config.output = str(Path(out_dir) / f"demo_{mode}.json") if out_dir else None
        report = Runtime(run_config).run_assessment(specs=specs)
        summary[mode] = {"rejections": report.rejections, "table": report.table}
        logger.info(f"Demo twin {mode}: {report.rejections} rejections")
    return summary


def cmd_demo(config: AssessmentConfig, args) -> int:
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    samples = DEMO_WORLD_SAMPLES if args.world_samples is None else args.world_samples
    _emit(run_demo(config, args.out_dir, samples))
    return EXIT_OK


def _config_parser() -> argparse.ArgumentParser:
    """Flags shared by all subcommands; each overrides the matching config key"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('-v', '--verbose', action='store_true', help='Enable verbose logging')
    parser.add_argument('--config', help='JSON config file')
    group = parser.add_argument_group('config overrides')
    group.add_argument('--dataset', help='Observational dataset (JSON lines)')
    group.add_argument('--schema', help='Feature schema (JSON)')
    group.add_argument('--hypotheses', help='Hypotheses file (JSON array)')
    group.add_argument('--world', help='World file or shipped fixture name')
    group.add_argument('--twin', help='correct, shifted, propensity_blind, stratum, external or a registered name')
    group.add_argument('--twin-command', type=shlex.split, help='Command line of an external twin')
    group.add_argument('--twin-data-dir', help='Directory of pre-generated twin datasets')
    group.add_argument('--raw-dose-columns', nargs='+', help='Step features holding raw doses')
    group.add_argument('--quantities', nargs='+', help='Step features to generate hypotheses for')
    group.add_argument('--sex-feature')
    group.add_argument('--age-feature')
    group.add_argument('--method', choices=METHODS)
    group.add_argument('--alpha', type=float)
    group.add_argument('--fwer', type=float)
    group.add_argument('--bootstrap-samples', type=int)
    group.add_argument('--min-bootstrap-n', type=int)
    group.add_argument('--bootstrap-variant', choices=BOOTSTRAP_VARIANTS)
    group.add_argument('--holm-family', choices=HOLM_FAMILIES)
    group.add_argument('--held-out-fraction', type=float)
    group.add_argument('--q-lo', type=float)
    group.add_argument('--q-up', type=float)
    group.add_argument('--median-split', choices=MEDIAN_SPLITS)
    group.add_argument('--twin-shift', type=float)
    group.add_argument('--twin-stratum', type=int)
    group.add_argument('--twin-samples', type=int)
    group.add_argument('--world-samples', type=int)
    group.add_argument('--workers', type=int)
    group.add_argument('--twin-timeout', type=float)
    group.add_argument('--longitudinal', choices=LONGITUDINAL_MODES,
                       help='Hypotheses that get a naive-vs-causal series in the report')
    group.add_argument('--no-histogram-truncation', dest='histogram_truncation',
                       action='store_const', const=False, help='Histogram axes span all values')
    group.add_argument('--histogram-bins', type=int)
    group.add_argument('--output', help='Output file')
    group.add_argument('--seed', type=int)
    return parser


CONFIG_FLAGS = (
    "dataset", "schema", "hypotheses", "world", "twin", "twin_command", "twin_data_dir",
    "raw_dose_columns", "quantities", "sex_feature", "age_feature", "method", "alpha", "fwer",
    "bootstrap_samples", "min_bootstrap_n", "bootstrap_variant", "holm_family", "held_out_fraction",
    "q_lo", "q_up", "median_split", "twin_shift", "twin_stratum", "twin_samples", "world_samples",
    "workers", "twin_timeout", "longitudinal", "histogram_truncation", "histogram_bins", "output", "seed",
)


def build_parser() -> argparse.ArgumentParser:
    common = _config_parser()
    parser = argparse.ArgumentParser(
        description='Falsify digital twins against observational data',
        epilog='Example: python -m twinfalsify demo'
    )
    parser.add_argument('--version', action='version', version=f'twinfalsify {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('ingest', parents=[common], help='Validate a dataset against its schema')
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser('split', parents=[common], help='Split into held-out and main datasets')
    p.add_argument('--out-dir', required=True)
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser('bin-actions', parents=[common], help='Fit dose binning on a held-out dataset')
    p.add_argument('--out-dir', required=True)
    p.add_argument('--apply', nargs='+', help='Datasets to bin with the fitted binning')
    p.set_defaults(handler=cmd_bin_actions)

    p = sub.add_parser('gen-hypotheses', parents=[common], help='Generate hypotheses from a held-out dataset')
    p.set_defaults(handler=cmd_gen_hypotheses)

    p = sub.add_parser('gen-twin-data', parents=[common], help='Simulate twin trajectories')
    p.add_argument('--actions', nargs='+', required=True, help='Action sequences such as 1-0')
    p.add_argument('--binning', help='Binning export, for twins consuming raw doses')
    p.add_argument('--out-dir', required=True)
    p.set_defaults(handler=cmd_gen_twin_data)

    p = sub.add_parser('test', parents=[common], help='Run the full assessment')
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser('report', parents=[common], help='Print a section of a saved report')
    p.add_argument('input')
    p.add_argument('--section', default='table',
                   choices=['table', 'p_values', 'sample_sizes', 'histograms', 'longitudinal', 'sweep', 'metadata'])
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser('sweep', parents=[common], help='Rejections as intervals are scaled')
    p.add_argument('--deltas', nargs='+', type=float, default=[-0.5, -0.25, 0.0, 0.25, 0.5])
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser('demo', parents=[common],
                       help=f'Brake-pad world end to end ({DEMO_WORLD_SAMPLES} trajectories unless --world-samples)')
    p.add_argument('--out-dir')
    p.set_defaults(handler=cmd_demo)
    return parser


def exit_code(error: BaseException) -> int:
    if isinstance(error, StageError):
        return EXIT_VALIDATION if isinstance(error.cause, ValidationError) else EXIT_STAGE
    if isinstance(error, ValidationError):
        return EXIT_VALIDATION
    if isinstance(error, TwinError):
        return EXIT_STAGE
    return EXIT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point"""
    args = build_parser().parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else default_log_level())

    try:
        config = AssessmentConfig.from_file(args.config) if args.config else AssessmentConfig()
        config.update(**{name: getattr(args, name) for name in CONFIG_FLAGS})
        return args.handler(config, args)
    except (ValidationError, StageError, TwinError) as e:
        logger.error(str(e))
        return exit_code(e)
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=args.verbose)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
