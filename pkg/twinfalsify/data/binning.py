"""Discretization of raw continuous doses into finite action indices.

Raw doses are step features: the dose recorded in step s is the action A_s
that precedes X_s. Each dose dimension gets five bins: bin 0 holds dose
exactly 0, bins 1-4 are delimited by the quartiles of the strictly
positive doses, half-open on the right.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .dataset import TrajectoryDataset
from .schema import FeatureKind, FeatureSchema
from ..errors import DegenerateBinningError, ValidationError

logger = logging.getLogger(__name__)

BINS_PER_DIM = 5


@dataclass(frozen=True)
class DoseBins:
    column: str
    edges: Tuple[float, float, float]
    representatives: Tuple[float, ...]

    def bin_of(self, doses: np.ndarray) -> np.ndarray:
        doses = np.asarray(doses, dtype=float)
        bins = 1 + np.searchsorted(np.asarray(self.edges), doses, side="right")
        return np.where(doses == 0, 0, bins)

    def to_dict(self) -> Dict[str, Any]:
        return {"column": self.column, "edges": list(self.edges),
                "representatives": list(self.representatives)}


@dataclass(frozen=True)
class ActionBinning:
    dims: Tuple[DoseBins, ...]

    @property
    def columns(self) -> List[str]:
        return [d.column for d in self.dims]

    @property
    def cardinality(self) -> int:
        return BINS_PER_DIM ** len(self.dims)

    def action_index(self, doses: Sequence[float]) -> int:
        """Row-major combined bin index of one raw dose vector"""
        return int(self.action_indices(np.asarray(doses, dtype=float)[None, :])[0])

    def action_indices(self, doses: np.ndarray) -> np.ndarray:
        doses = np.asarray(doses, dtype=float)
        index = np.zeros(doses.shape[:-1], dtype=np.int64)
        for k, dim in enumerate(self.dims):
            index = index * BINS_PER_DIM + dim.bin_of(doses[..., k])
        return index

    def representative(self, action: int) -> List[float]:
        """Median raw dose vector administered for a combined action index"""
        if not 0 <= action < self.cardinality:
            raise ValidationError(f"Action index {action} out of range [0, {self.cardinality})")
        out = []
        for dim in reversed(self.dims):
            action, b = divmod(action, BINS_PER_DIM)
            out.append(dim.representatives[b])
        return out[::-1]

    def apply(self, d: TrajectoryDataset) -> TrajectoryDataset:
        """Replace raw dose features by binned action indices"""
        schema = d.schema
        dose_idx = [schema.step_index(c) for c in self.columns]
        keep = [i for i in range(schema.step_dim) if i not in dose_idx]
        actions = self.action_indices(d.x[:, :, dose_idx])
        binned_schema = FeatureSchema(
            schema.horizon,
            schema.x0_features,
            [schema.step_features[i] for i in keep],
            [self.cardinality] * schema.horizon,
        )
        logger.info(f"Binned {len(self.dims)} dose dimension(s) into {self.cardinality} actions")
        return TrajectoryDataset(binned_schema, d.x0, actions, d.x[:, :, keep], d.provenance)

    def to_dict(self) -> Dict[str, Any]:
        return {"dims": [d.to_dict() for d in self.dims]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ActionBinning":
        try:
            return cls(tuple(
                DoseBins(d.get("column", f"dose{k}"), tuple(d["edges"]), tuple(d["representatives"]))
                for k, d in enumerate(data["dims"])
            ))
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Invalid binning export: {e}")

    def dump(self, path: str):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def _fit_dim(column: str, doses: np.ndarray) -> DoseBins:
    positive = doses[doses > 0]
    if positive.size == 0:
        raise DegenerateBinningError(f"No positive doses for '{column}'")
    edges = np.quantile(positive, [0.25, 0.5, 0.75])
    if not np.all(np.diff(edges) > 0):
        raise DegenerateBinningError(f"Quartiles of '{column}' are tied: {edges.tolist()}")

    dims = DoseBins(column, tuple(float(e) for e in edges), ())
    bins = dims.bin_of(doses)
    bounds = [0.0, *edges.tolist(), float(positive.max())]
    representatives = [0.0]
    for b in range(1, BINS_PER_DIM):
        members = doses[bins == b]
        if members.size:
            representatives.append(float(np.median(members)))
        else:
            # empty bin: midpoint of its edges
            representatives.append(0.5 * (bounds[b - 1] + bounds[b]))
            logger.warning(f"Empty dose bin {b} for '{column}'")
    return DoseBins(column, dims.edges, tuple(representatives))


def fit_action_binning(d0: TrajectoryDataset, raw_dose_columns: Sequence[str]) -> ActionBinning:
    """Fit quartile bins on the positive doses of the held-out set"""
    if not raw_dose_columns:
        raise ValidationError("At least one raw dose column is required")
    dims = []
    for column in raw_dose_columns:
        i = d0.schema.step_index(column)
        if d0.schema.step_features[i].kind is not FeatureKind.CONTINUOUS:
            raise ValidationError(f"Dose column '{column}' must be continuous")
        doses = d0.x[:, :, i].ravel()
        if np.any(doses < 0):
            raise ValidationError(f"Dose column '{column}' has negative values")
        dims.append(_fit_dim(column, doses))
    binning = ActionBinning(tuple(dims))
    logger.info(f"Fitted action binning on {len(d0)} held-out trajectories: {binning.columns}")
    return binning
