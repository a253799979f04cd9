"""Exact one-sided tests from Hoeffding's inequality"""

import math
from typing import Optional, Tuple

import numpy as np

from ..errors import ValidationError

# log-spaced significance levels used for grid p-values; the floor is 1e-6
ALPHA_GRID = np.logspace(-6, 0, 120)
P_FLOOR = np.finfo(float).tiny


def hoeffding_margin(n: int, y_range: float, alpha: float) -> float:
    """Delta = range * sqrt(log(2/alpha) / (2n))"""
    if not 0.0 < alpha <= 1.0:
        raise ValidationError(f"alpha must lie in (0, 1], got {alpha}")
    if n < 1:
        raise ValidationError(f"Hoeffding margin needs n >= 1, got {n}")
    if y_range < 0:
        raise ValidationError(f"Outcome range must be nonnegative, got {y_range}")
    return y_range * math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def hoeffding_bounds(mu_lo: float, mu_up: float, n: int, mu_hat: float, n_hat: int,
                     y_range: float, alpha: float) -> Tuple[float, float, float, float]:
    """(q_lo, q_up, q_hat_lower, q_hat_upper) at level alpha"""
    delta = hoeffding_margin(n, y_range, alpha)
    delta_hat = hoeffding_margin(n_hat, y_range, alpha)
    return mu_lo - delta, mu_up + delta, mu_hat - delta_hat, mu_hat + delta_hat


def _closed_form(gap: float, n: int, n_hat: int, y_range: float) -> float:
    if y_range <= 0 or gap <= 0:
        return 1.0
    c = gap / (y_range * (1.0 / math.sqrt(n) + 1.0 / math.sqrt(n_hat)))
    return float(min(1.0, max(P_FLOOR, 2.0 * math.exp(-2.0 * c * c))))


def p_value_hoeffding_lo(mu_lo: float, n: int, mu_hat: float, n_hat: int, y_range: float) -> float:
    """Smallest alpha at which q_hat_alpha < q_lo_alpha, in closed form"""
    return _closed_form(mu_lo - mu_hat, n, n_hat, y_range)


def p_value_hoeffding_up(mu_up: float, n: int, mu_hat: float, n_hat: int, y_range: float) -> float:
    """Smallest alpha at which the twin's lower bound exceeds q_up_alpha"""
    return _closed_form(mu_hat - mu_up, n, n_hat, y_range)


def grid_p_values(mu_lo: float, mu_up: float, n: int, mu_hat: float, n_hat: int,
                  y_range: float, grid: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """Literal search over the alpha grid for the smallest rejecting level"""
    grid = ALPHA_GRID if grid is None else grid
    p_lo = p_up = 1.0
    for alpha in sorted(grid, reverse=True):
        q_lo, q_up, q_hat_lower, q_hat_upper = hoeffding_bounds(mu_lo, mu_up, n, mu_hat, n_hat, y_range, alpha)
        if q_hat_upper < q_lo:
            p_lo = float(alpha)
        if q_hat_lower > q_up:
            p_up = float(alpha)
    return p_lo, p_up
