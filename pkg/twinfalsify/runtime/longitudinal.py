"""Naive vs causal comparison of a twin along one action sequence"""

import logging
from typing import Any, Dict, List, Optional, Sequence

from ..bounds.engine import summarize_observational, summarize_twin
from ..data.dataset import TrajectoryDataset
from ..errors import ValidationError
from ..hypothesis.spec import HypothesisSpec
from ..stats.hoeffding import hoeffding_margin
from ..twin.dataset import TwinDataset

logger = logging.getLogger(__name__)


def _interval(mean: Optional[float], n: int, y_range: float, alpha: float) -> Dict[str, Any]:
    margin = hoeffding_margin(n, y_range, alpha)
    return {"n": n, "estimate": mean, "ci": [mean - margin, mean + margin]}


def check_family(specs: Sequence[HypothesisSpec]):
    """Specs for t = 1..T must share a_{1:T} and B_{0:T}"""
    if not specs:
        raise ValidationError("Longitudinal comparison needs at least one spec")
    longest = max(specs, key=lambda s: s.t)
    for spec in specs:
        if spec.actions != longest.actions[:spec.t]:
            raise ValidationError(f"{spec.spec_id}: actions {list(spec.actions)} are not a prefix "
                                  f"of {list(longest.actions)}")
        if spec.region.steps != longest.region.steps[:spec.t + 1]:
            raise ValidationError(f"{spec.spec_id}: region is not a prefix of {longest.spec_id}'s region")
    if len({s.t for s in specs}) != len(specs):
        raise ValidationError("Longitudinal specs must have distinct timesteps")


def longitudinal_comparison(obs: TrajectoryDataset, twin: TwinDataset, specs: Sequence[HypothesisSpec],
                            alpha: float = 0.05) -> List[Dict[str, Any]]:
    """
    Per-timestep series of the twin mean, the naive observational mean and the causal bounds.

    Args:
        obs: Observational dataset
        twin: Twin data generated under the longest action sequence
        specs: One spec per timestep sharing actions and region
        alpha: Two-sided level of the intervals around both means; the
            bounds on Q_lo and Q_up are one-sided with coverage 1 - alpha

    Returns:
        One entry per spec in order of t; entries with an empty conditioning
        set carry ``absent: True``
    """
    if not 0.0 < alpha <= 0.5:
        raise ValidationError(f"alpha must lie in (0, 0.5], got {alpha}")
    check_family(specs)
    series = []
    for spec in sorted(specs, key=lambda s: s.t):
        y_range = spec.outcome.y_range
        o = summarize_observational(obs, spec)
        w = summarize_twin(twin, spec)
        entry: Dict[str, Any] = {"t": spec.t, "id": spec.spec_id, "n": o.n, "n_agree": o.n_agree, "n_hat": w.n_hat}
        if o.n_agree == 0 or w.n_hat == 0:
            logger.debug(f"t={spec.t}: empty conditioning set (n_agree={o.n_agree}, n_hat={w.n_hat})")
            entry["absent"] = True
            series.append(entry)
            continue
        naive = float(o.agree_outcomes.mean())
        margin = hoeffding_margin(o.n, y_range, 2 * alpha)
        twin_margin = hoeffding_margin(w.n_hat, y_range, 2 * alpha)
        entry.update({
            "absent": False,
            "twin": _interval(w.mu_hat, w.n_hat, y_range, alpha),
            "observational": _interval(naive, o.n_agree, y_range, alpha),
            "q_lo": o.mu_lo - margin,
            "q_up": o.mu_up + margin,
            "falsified_lo": w.mu_hat + twin_margin < o.mu_lo - margin,
            "falsified_up": w.mu_hat - twin_margin > o.mu_up + margin,
        })
        series.append(entry)
    logger.info(f"Longitudinal comparison over {len(series)} timesteps "
                f"({sum(e['absent'] for e in series)} absent)")
    return series


def prefix_family(spec: HypothesisSpec) -> List[HypothesisSpec]:
    """``spec`` cut back to every timestep t = 1..T"""
    return [spec.truncated(s) for s in range(1, spec.t + 1)]
