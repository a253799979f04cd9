"""Diagnostics on unclipped outcomes and on interval lengths"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from .bootstrap import bootstrap_bound
from .hoeffding import hoeffding_margin
from ..bounds.engine import BoundSummary, TwinSummary
from ..hypothesis.spec import HypothesisSpec


def tail_summary(raw: np.ndarray, y_lo: float, y_up: float) -> Dict[str, Optional[float]]:
    """P(Z >= y_up), P(Z > y_lo) and E[Z | y_lo < Z < y_up]"""
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        return {"n": 0, "p_ge_y_up": None, "p_gt_y_lo": None, "interior_mean": None}
    interior = raw[(raw > y_lo) & (raw < y_up)]
    return {
        "n": int(raw.size),
        "p_ge_y_up": float(np.mean(raw >= y_up)),
        "p_gt_y_lo": float(np.mean(raw > y_lo)),
        "interior_mean": float(interior.mean()) if interior.size else None,
    }


def unclipped_diagnostics(obs: BoundSummary, twin: TwinSummary, spec: HypothesisSpec) -> Dict[str, Any]:
    """Tail and interior statistics of the raw outcome for both datasets.

    A rejection of H_up (H_lo) means at least one of these quantities is too
    large (small) for the twin relative to the observational data.
    """
    y_lo, y_up = spec.outcome.y_lo, spec.outcome.y_up
    return {
        "observational": tail_summary(obs.agree_raw, y_lo, y_up),
        "twin": tail_summary(twin.raw, y_lo, y_up),
    }


def interval_length_ratio(obs: BoundSummary, twin: TwinSummary, spec: HypothesisSpec, alpha: float,
                          B: int = 100, seed=0) -> Tuple[Optional[float], Optional[float]]:
    """Hoeffding over bootstrap lengths of [y_lo, q_hat_alpha] and [q_lo_alpha, y_up]"""
    y_lo, y_up = spec.outcome.y_lo, spec.outcome.y_up
    q_hat_hoeffding = twin.mu_hat + hoeffding_margin(twin.n_hat, spec.outcome.y_range, alpha)
    q_lo_hoeffding = obs.mu_lo - hoeffding_margin(obs.n, spec.outcome.y_range, alpha)
    q_hat_boot = bootstrap_bound(twin.samples, alpha, "upper", B, [seed, 2])
    q_lo_boot = bootstrap_bound(obs.lo_samples, alpha, "lower", B, [seed, 0])

    def ratio(num: float, den: float) -> Optional[float]:
        return float(num / den) if den > 0 else None

    return ratio(q_hat_hoeffding - y_lo, q_hat_boot - y_lo), ratio(y_up - q_lo_hoeffding, y_up - q_lo_boot)
