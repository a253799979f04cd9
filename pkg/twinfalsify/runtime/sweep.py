"""Sensitivity of the rejection count to the width of [y_lo, y_up]"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .report import AssessmentReport
from .runtime import AssessmentState, Runtime, apply_holm, run_tests
from ..hypothesis.spec import HypothesisSpec

logger = logging.getLogger(__name__)


def scaled_interval(spec: HypothesisSpec, delta: float) -> Tuple[float, float]:
    """[y_lo (1 - delta/2), y_up (1 + delta/2)]"""
    return spec.outcome.y_lo * (1.0 - delta / 2.0), spec.outcome.y_up * (1.0 + delta / 2.0)


def rescale_specs(specs: Sequence[HypothesisSpec], delta: float) -> Tuple[Optional[List[HypothesisSpec]], str]:
    """Specs with scaled intervals, or (None, reason) when some interval collapses or inverts.

    Indicator outcomes and already degenerate specs are left alone.
    """
    scaled = []
    for spec in specs:
        if spec.outcome.kind != "clip" or spec.degenerate:
            scaled.append(spec)
            continue
        y_lo, y_up = scaled_interval(spec, delta)
        if y_lo > y_up:
            return None, f"inverted interval for {spec.spec_id}"
        if y_lo == y_up:
            return None, f"collapsed interval for {spec.spec_id}"
        scaled.append(spec.with_interval(y_lo, y_up))
    return scaled, ""


def sensitivity_sweep(runtime: Runtime, deltas: Sequence[float],
                      state: Optional[AssessmentState] = None) -> List[Dict[str, Any]]:
    """
    Rerun testing and Holm with every interval scaled by each delta.

    Args:
        runtime: Runtime carrying the base config
        deltas: Relative widenings (negative values narrow)
        state: A base run that got at least through twin data generation;
            run up to that stage when omitted

    Returns:
        One row per delta with rejection counts, or ``skipped`` and a reason
    """
    if state is None:
        state = runtime.run_stages(AssessmentState(), until="twin_data")
    config = runtime.config
    rows = []
    for delta in deltas:
        specs, reason = rescale_specs(state.specs, float(delta))
        if specs is None:
            logger.warning(f"Skipping delta={delta}: {reason}")
            rows.append({"delta": float(delta), "skipped": True, "reason": reason})
            continue
        outcomes = run_tests(state.main, state.twin_data, specs, config)
        apply_holm(outcomes, config.fwer, config.holm_family)
        rows.append({
            "delta": float(delta),
            "skipped": False,
            "tested": sum(o.tested for o in outcomes),
            "rejections_lo": sum(o.holm_reject_lo for o in outcomes),
            "rejections_up": sum(o.holm_reject_up for o in outcomes),
            "rejections": sum(o.holm_reject_lo or o.holm_reject_up for o in outcomes),
            "rejected": sorted(o.spec.spec_id for o in outcomes if o.holm_reject_lo or o.holm_reject_up),
        })
        logger.info(f"delta={delta:g}: {rows[-1]['rejections']} hypotheses rejected")
    return rows


def sweep_assessment(runtime: Runtime, deltas: Sequence[float],
                     specs: Optional[List[HypothesisSpec]] = None) -> AssessmentReport:
    """Base assessment whose report carries the sweep rows; written to ``config.output`` when set"""
    report = runtime.run_assessment(specs=specs, write=False)
    report.sweep = sensitivity_sweep(runtime, deltas, runtime.last_state)
    if runtime.config.output:
        report.write(runtime.config.output)
    return report
