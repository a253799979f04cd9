"""Antecedent checks and p-values for one hypothesis"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from .bootstrap import bootstrap_bound, bootstrap_p_values
from .diagnostics import interval_length_ratio, unclipped_diagnostics
from .hoeffding import ALPHA_GRID, hoeffding_bounds, p_value_hoeffding_lo, p_value_hoeffding_up
from ..bounds.engine import BoundSummary, TwinSummary, summarize_observational, summarize_twin
from ..errors import ValidationError
from ..hypothesis.spec import HypothesisSpec

logger = logging.getLogger(__name__)

TESTED = "tested"
SKIPPED_ANTECEDENT = "skipped(antecedent)"
SKIPPED_DEGENERATE = "skipped(degenerate)"
SKIPPED_MIN_N = "skipped(bootstrap_min_n)"


@dataclass
class TestOutcome:
    """p_lo and p_up of one hypothesis plus everything used to get them"""
    __test__ = False

    spec: HypothesisSpec
    method: str
    status: str
    antecedent_ok: bool
    obs: BoundSummary
    twin: TwinSummary
    alpha: float
    p_lo: float = 1.0
    p_up: float = 1.0
    bounds: Dict[str, Optional[float]] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    holm_reject_lo: bool = False
    holm_reject_up: bool = False

    @property
    def tested(self) -> bool:
        return self.status == TESTED

    @property
    def n(self) -> int:
        return self.obs.n

    @property
    def n_hat(self) -> int:
        return self.twin.n_hat

    @property
    def reject_lo(self) -> bool:
        return self.p_lo <= self.alpha

    @property
    def reject_up(self) -> bool:
        return self.p_up <= self.alpha

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.spec.spec_id,
            "label": self.spec.label,
            "t": self.spec.t,
            "actions": list(self.spec.actions),
            "y_lo": self.spec.outcome.y_lo,
            "y_up": self.spec.outcome.y_up,
            "method": self.method,
            "status": self.status,
            "antecedent_ok": self.antecedent_ok,
            "observational": self.obs.to_dict(),
            "twin": self.twin.to_dict(),
            "alpha": self.alpha,
            "p_lo": self.p_lo,
            "p_up": self.p_up,
            "reject_lo": self.reject_lo,
            "reject_up": self.reject_up,
            "holm_reject_lo": self.holm_reject_lo,
            "holm_reject_up": self.holm_reject_up,
            "bounds": self.bounds,
            "diagnostics": self.diagnostics,
        }


def _status(obs: BoundSummary, twin: TwinSummary, spec: HypothesisSpec, method: str,
            min_bootstrap_n: int) -> str:
    if obs.n_agree == 0 or twin.n_hat == 0:
        return SKIPPED_ANTECEDENT
    if spec.degenerate:
        return SKIPPED_DEGENERATE
    if method == "bootstrap" and (obs.n < min_bootstrap_n or twin.n_hat < min_bootstrap_n):
        return SKIPPED_MIN_N
    return TESTED


def test_hypothesis(obs_data, twin_data, spec: HypothesisSpec, method: str = "hoeffding",
                    alpha: float = 0.05, alpha_grid: Optional[np.ndarray] = None,
                    bootstrap_samples: int = 100, min_bootstrap_n: int = 100, seed=0,
                    bootstrap_variant: str = "reverse_percentile",
                    obs_summary: Optional[BoundSummary] = None) -> TestOutcome:
    """Test H_lo and H_up for one spec; statistical failure modes become statuses"""
    if method not in ("hoeffding", "bootstrap"):
        raise ValidationError(f"Unknown method: {method}")
    obs = obs_summary if obs_summary is not None else summarize_observational(obs_data, spec)
    twin = summarize_twin(twin_data, spec)
    status = _status(obs, twin, spec, method, min_bootstrap_n)
    outcome = TestOutcome(spec, method, status, status != SKIPPED_ANTECEDENT, obs, twin, alpha)
    if status != TESTED:
        logger.debug(f"{spec.spec_id}: {status}")
        return outcome

    y_range = spec.outcome.y_range
    if method == "hoeffding":
        outcome.p_lo = p_value_hoeffding_lo(obs.mu_lo, obs.n, twin.mu_hat, twin.n_hat, y_range)
        outcome.p_up = p_value_hoeffding_up(obs.mu_up, obs.n, twin.mu_hat, twin.n_hat, y_range)
        q_lo, q_up, q_hat_lower, q_hat_upper = hoeffding_bounds(
            obs.mu_lo, obs.mu_up, obs.n, twin.mu_hat, twin.n_hat, y_range, alpha
        )
    else:
        grid = ALPHA_GRID if alpha_grid is None else alpha_grid
        outcome.p_lo, outcome.p_up = bootstrap_p_values(
            obs.lo_samples, obs.up_samples, twin.samples, bootstrap_samples, seed, bootstrap_variant, grid
        )
        q_lo = bootstrap_bound(obs.lo_samples, alpha, "lower", bootstrap_samples, [seed, 0], bootstrap_variant)
        q_up = bootstrap_bound(obs.up_samples, alpha, "upper", bootstrap_samples, [seed, 1], bootstrap_variant)
        q_hat_upper = bootstrap_bound(twin.samples, alpha, "upper", bootstrap_samples, [seed, 2], bootstrap_variant)
        q_hat_lower = bootstrap_bound(twin.samples, alpha, "lower", bootstrap_samples, [seed, 2], bootstrap_variant)
    outcome.bounds = {
        "q_lo": float(q_lo), "q_up": float(q_up),
        "q_hat_lower": float(q_hat_lower), "q_hat_upper": float(q_hat_upper),
    }

    outcome.diagnostics = {"unclipped": unclipped_diagnostics(obs, twin, spec)}
    if obs.n >= min_bootstrap_n and twin.n_hat >= min_bootstrap_n:
        ratio_lo, ratio_up = interval_length_ratio(obs, twin, spec, alpha, bootstrap_samples, seed)
        outcome.diagnostics["interval_length_ratio"] = {"lo": ratio_lo, "up": ratio_up}
    logger.debug(f"{spec.spec_id}: p_lo={outcome.p_lo:.3g} p_up={outcome.p_up:.3g}")
    return outcome


test_hypothesis.__test__ = False
