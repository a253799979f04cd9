"""Trajectory data model: schema, datasets, splitting and action binning"""

from .schema import Feature, FeatureKind, FeatureSchema
from .dataset import (
    Step,
    ObservationalTrajectory,
    TrajectoryDataset,
    load_dataset,
    dump_dataset,
    split_dataset,
)
from .binning import ActionBinning, DoseBins, fit_action_binning

__all__ = [
    "Feature",
    "FeatureKind",
    "FeatureSchema",
    "Step",
    "ObservationalTrajectory",
    "TrajectoryDataset",
    "load_dataset",
    "dump_dataset",
    "split_dataset",
    "ActionBinning",
    "DoseBins",
    "fit_action_binning",
]
