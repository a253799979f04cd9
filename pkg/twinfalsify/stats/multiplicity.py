"""Holm-Bonferroni step-down control of the family-wise error rate"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..errors import ValidationError


@dataclass
class MultiplicityResult:
    p_values: np.ndarray
    order: np.ndarray
    rejected: np.ndarray
    adjusted: np.ndarray
    fwer: float

    @property
    def n_rejected(self) -> int:
        return int(self.rejected.sum())

    def rejected_indices(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.rejected)]


def holm_bonferroni(p_values: Sequence[float], fwer: float = 0.05) -> MultiplicityResult:
    """Reject in ascending order while p_(k) <= fwer / (m - k + 1)"""
    p = np.asarray(p_values, dtype=float)
    if np.any((p <= 0) | (p > 1)):
        raise ValidationError("p-values must lie in (0, 1]")
    if not 0.0 < fwer < 1.0:
        raise ValidationError(f"fwer must lie in (0, 1), got {fwer}")
    m = p.size
    order = np.argsort(p, kind="stable")
    rejected = np.zeros(m, dtype=bool)
    for k, idx in enumerate(order):
        if p[idx] > fwer / (m - k):
            break
        rejected[idx] = True

    adjusted = np.empty(m)
    adjusted[order] = np.minimum(1.0, np.maximum.accumulate(p[order] * (m - np.arange(m))))
    return MultiplicityResult(p, order, rejected, adjusted, fwer)
