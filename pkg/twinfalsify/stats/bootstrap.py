"""Approximate one-sided bounds from the bootstrap"""

from typing import Optional, Sequence, Tuple

import numpy as np

from .hoeffding import ALPHA_GRID
from ..errors import ValidationError

VARIANTS = ("reverse_percentile", "percentile")


def resample_means(samples: Sequence[float], B: int = 100, seed=0) -> np.ndarray:
    """Means of B resamples drawn with replacement"""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValidationError("Cannot bootstrap an empty sample")
    if B < 1:
        raise ValidationError(f"Need at least one bootstrap sample, got {B}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, samples.size, size=(B, samples.size))
    return samples[idx].mean(axis=1)


def bounds_from_means(mean: float, means: np.ndarray, alphas, side: str,
                      variant: str = "reverse_percentile") -> np.ndarray:
    """One-sided bounds at each alpha from a fixed set of resampled means"""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if side == "lower":
        levels = 1.0 - alphas / 2.0 if variant == "reverse_percentile" else alphas / 2.0
    elif side == "upper":
        levels = alphas / 2.0 if variant == "reverse_percentile" else 1.0 - alphas / 2.0
    else:
        raise ValidationError(f"side must be 'lower' or 'upper', got {side}")
    if variant not in VARIANTS:
        raise ValidationError(f"Unknown bootstrap variant: {variant}")
    quantiles = np.quantile(means, levels)
    if variant == "reverse_percentile":
        return 2.0 * mean - quantiles
    return quantiles


def bootstrap_bound(samples: Sequence[float], alpha: float, side: str, B: int = 100,
                    seed=0, variant: str = "reverse_percentile") -> float:
    """Lower or upper bound at level 1 - alpha/2 (reverse percentile by default)"""
    samples = np.asarray(samples, dtype=float)
    means = resample_means(samples, B, seed)
    return float(bounds_from_means(samples.mean(), means, alpha, side, variant)[0])


def bootstrap_p_values(lo_samples: np.ndarray, up_samples: np.ndarray, twin_samples: np.ndarray,
                       B: int = 100, seed=0, variant: str = "reverse_percentile",
                       grid: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """Smallest grid alpha rejecting H_lo and H_up.

    One resample set per sample is reused across the grid so that the
    bounds are nested in alpha.
    """
    grid = np.sort(ALPHA_GRID if grid is None else np.asarray(grid, dtype=float))
    q_lo = bounds_from_means(lo_samples.mean(), resample_means(lo_samples, B, [seed, 0]), grid, "lower", variant)
    q_up = bounds_from_means(up_samples.mean(), resample_means(up_samples, B, [seed, 1]), grid, "upper", variant)
    twin_means = resample_means(twin_samples, B, [seed, 2])
    q_hat_upper = bounds_from_means(twin_samples.mean(), twin_means, grid, "upper", variant)
    q_hat_lower = bounds_from_means(twin_samples.mean(), twin_means, grid, "lower", variant)
    return _smallest(grid, q_hat_upper < q_lo), _smallest(grid, q_hat_lower > q_up)


def _smallest(grid: np.ndarray, rejects: np.ndarray) -> float:
    hits = np.flatnonzero(rejects)
    return float(grid[hits[0]]) if hits.size else 1.0
