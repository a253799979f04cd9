"""Assessment configuration"""

import os
import json
import logging
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional

from .errors import ValidationError

logger = logging.getLogger(__name__)

METHODS = ("hoeffding", "bootstrap")
MEDIAN_SPLITS = ("per_timestep", "pooled")
HOLM_FAMILIES = ("joint", "per_quantity")
BOOTSTRAP_VARIANTS = ("reverse_percentile", "percentile")
LONGITUDINAL_MODES = ("rejected", "all", "none")


def default_log_level() -> int:
    """Log level from TWINFALSIFY_LOG_LEVEL, INFO otherwise"""
    name = os.getenv("TWINFALSIFY_LOG_LEVEL", "INFO").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def default_twin_timeout() -> float:
    raw = os.getenv("TWINFALSIFY_TWIN_TIMEOUT")
    if raw is None:
        return 30.0
    try:
        return float(raw)
    except ValueError:
        logger.warning(f"Ignoring invalid TWINFALSIFY_TWIN_TIMEOUT={raw!r}")
        return 30.0


@dataclass
class AssessmentConfig:
    """Parameters of one assessment run.

    Paths are optional so that the same object drives both the library
    (`Runtime.run_assessment`) and the individual CLI subcommands.
    """
    # inputs
    dataset: Optional[str] = None
    schema: Optional[str] = None
    hypotheses: Optional[str] = None
    world: Optional[str] = None
    twin: str = "correct"
    twin_command: Optional[List[str]] = None
    twin_data_dir: Optional[str] = None
    raw_dose_columns: List[str] = field(default_factory=list)
    quantities: List[str] = field(default_factory=list)
    sex_feature: str = "sex"
    age_feature: str = "age"

    # testing
    method: str = "hoeffding"
    alpha: float = 0.05
    fwer: float = 0.05
    bootstrap_samples: int = 100
    min_bootstrap_n: int = 100
    bootstrap_variant: str = "reverse_percentile"
    holm_family: str = "joint"

    # hypothesis generation
    held_out_fraction: float = 0.05
    q_lo: float = 0.2
    q_up: float = 0.8
    median_split: str = "per_timestep"

    # twin data
    twin_shift: float = 0.0
    twin_stratum: int = 0
    twin_samples: Optional[int] = None
    world_samples: int = 5000
    workers: int = 1
    twin_timeout: float = field(default_factory=default_twin_timeout)

    # report
    longitudinal: str = "rejected"
    histogram_truncation: bool = True
    histogram_bins: int = 20
    output: Optional[str] = None

    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Check value ranges; raises ValidationError"""
        if self.method not in METHODS:
            raise ValidationError(f"Unknown method: {self.method}")
        if self.median_split not in MEDIAN_SPLITS:
            raise ValidationError(f"Unknown median_split: {self.median_split}")
        if self.holm_family not in HOLM_FAMILIES:
            raise ValidationError(f"Unknown holm_family: {self.holm_family}")
        if self.bootstrap_variant not in BOOTSTRAP_VARIANTS:
            raise ValidationError(f"Unknown bootstrap_variant: {self.bootstrap_variant}")
        if self.longitudinal not in LONGITUDINAL_MODES:
            raise ValidationError(f"Unknown longitudinal mode: {self.longitudinal}")
        for name in ("alpha", "fwer"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValidationError(f"{name} must lie in (0, 1), got {value}")
        if not 0.0 <= self.held_out_fraction <= 1.0:
            raise ValidationError(f"held_out_fraction must lie in [0, 1], got {self.held_out_fraction}")
        if not 0.0 <= self.q_lo < self.q_up <= 1.0:
            raise ValidationError(f"Need 0 <= q_lo < q_up <= 1, got {self.q_lo}, {self.q_up}")
        if self.bootstrap_samples < 1:
            raise ValidationError("bootstrap_samples must be positive")
        if self.world_samples < 0:
            raise ValidationError("world_samples must be nonnegative")
        if self.workers < 1:
            raise ValidationError("workers must be positive")
        if self.twin_timeout <= 0:
            raise ValidationError("twin_timeout must be positive")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AssessmentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"Unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> "AssessmentConfig":
        """Load a config from one JSON document"""
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"Config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ValidationError(f"Invalid config JSON in {path}: {e}")
        if not isinstance(data, dict):
            raise ValidationError(f"Config must be a JSON object: {path}")
        return cls.from_dict(data)

    def update(self, **overrides) -> "AssessmentConfig":
        """Merge explicit overrides (None values are ignored)"""
        known = {f.name for f in fields(self)}
        for key, value in overrides.items():
            if key not in known:
                raise ValidationError(f"Unknown config key: {key}")
            if value is not None:
                setattr(self, key, value)
        self.validate()
        logger.debug(f"Updated config: {overrides}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
