"""Observational trajectories: records, files and the sample split"""

import json
import math
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .schema import FeatureSchema
from ..errors import ParseError, SchemaViolation, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Step:
    action: int
    x: Tuple[float, ...]


@dataclass(frozen=True)
class ObservationalTrajectory:
    """One record X0, A1, X1, ..., AT, XT"""
    x0: Tuple[float, ...]
    steps: Tuple[Step, ...]

    @property
    def actions(self) -> Tuple[int, ...]:
        return tuple(step.action for step in self.steps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x0": [float(v) for v in self.x0],
            "steps": [{"a": int(s.action), "x": [float(v) for v in s.x]} for s in self.steps],
        }


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class TrajectoryDataset:
    """Immutable collection of trajectories sharing one schema.

    Storage is columnar: ``x0`` has shape (n, d0), ``actions`` (n, T) and
    ``x`` (n, T, d). Record objects are materialized on first access.
    """

    def __init__(self, schema: FeatureSchema, x0: np.ndarray, actions: np.ndarray,
                 x: np.ndarray, provenance: str = ""):
        n = len(x0)
        self.schema = schema
        self.provenance = provenance
        self.x0 = _readonly(np.array(x0, dtype=float).reshape(n, schema.x0_dim))
        self.actions = _readonly(np.array(actions, dtype=np.int64).reshape(n, schema.horizon))
        self.x = _readonly(np.array(x, dtype=float).reshape(n, schema.horizon, schema.step_dim))
        self._records: Optional[Tuple[ObservationalTrajectory, ...]] = None

    def __len__(self) -> int:
        return len(self.x0)

    def __repr__(self) -> str:
        return f"TrajectoryDataset(n={len(self)}, T={self.schema.horizon}, provenance={self.provenance!r})"

    @property
    def records(self) -> Tuple[ObservationalTrajectory, ...]:
        if self._records is None:
            self._records = tuple(
                ObservationalTrajectory(
                    x0=tuple(self.x0[i].tolist()),
                    steps=tuple(
                        Step(int(a), tuple(xs.tolist()))
                        for a, xs in zip(self.actions[i], self.x[i])
                    ),
                )
                for i in range(len(self))
            )
        return self._records

    @classmethod
    def from_records(cls, schema: FeatureSchema, records: Sequence[ObservationalTrajectory],
                     provenance: str = "") -> "TrajectoryDataset":
        for index, record in enumerate(records):
            validate_record(schema, record.to_dict(), index)
        n, horizon = len(records), schema.horizon
        x0 = np.array([r.x0 for r in records], dtype=float).reshape(n, schema.x0_dim)
        actions = np.array([r.actions for r in records], dtype=np.int64).reshape(n, horizon)
        x = np.array([[s.x for s in r.steps] for r in records], dtype=float).reshape(n, horizon, schema.step_dim)
        return cls(schema, x0, actions, x, provenance)

    @classmethod
    def empty(cls, schema: FeatureSchema, provenance: str = "") -> "TrajectoryDataset":
        return cls(
            schema,
            np.zeros((0, schema.x0_dim)),
            np.zeros((0, schema.horizon), dtype=np.int64),
            np.zeros((0, schema.horizon, schema.step_dim)),
            provenance,
        )

    def subset(self, indices: Iterable[int], provenance: Optional[str] = None) -> "TrajectoryDataset":
        idx = np.asarray(list(indices), dtype=np.int64)
        return TrajectoryDataset(
            self.schema, self.x0[idx], self.actions[idx], self.x[idx],
            self.provenance if provenance is None else provenance,
        )

    def digest(self) -> str:
        """sha256 over the columnar content"""
        h = hashlib.sha256()
        for array in (self.x0, self.actions, self.x):
            h.update(np.ascontiguousarray(array).tobytes())
        return h.hexdigest()

    def lines(self) -> List[str]:
        return [json.dumps(r.to_dict(), separators=(",", ":")) for r in self.records]


def _check_number(value: Any, where: str, index: int) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"{where}: expected a number, got {value!r}", index)
    if not math.isfinite(value):
        raise SchemaViolation(f"{where}: missing or non-finite value", index)
    return float(value)


def _check_vector(values: Any, features, where: str, index: int) -> List[float]:
    if not isinstance(values, list):
        raise SchemaViolation(f"{where}: expected a list", index)
    if len(values) != len(features):
        raise SchemaViolation(f"{where}: expected {len(features)} values, got {len(values)}", index)
    out = []
    for feature, value in zip(features, values):
        number = _check_number(value, f"{where}.{feature.name}", index)
        if not feature.accepts(number):
            raise SchemaViolation(
                f"{where}.{feature.name}: {number} is not a valid {feature.kind.value} value", index
            )
        out.append(number)
    return out


def validate_record(schema: FeatureSchema, data: Any, index: int,
                    horizon: Optional[int] = None) -> Tuple[List[float], List[int], List[List[float]]]:
    """Validate one decoded record; returns (x0, actions, xs)"""
    horizon = schema.horizon if horizon is None else horizon
    if not isinstance(data, dict):
        raise SchemaViolation("record must be a JSON object", index)
    for key in ("x0", "steps"):
        if key not in data:
            raise SchemaViolation(f"missing field '{key}'", index)
    extra = sorted(set(data) - {"x0", "steps"})
    if extra:
        raise SchemaViolation(f"unknown fields {extra}", index)

    x0 = _check_vector(data["x0"], schema.x0_features, "x0", index)
    steps = data["steps"]
    if not isinstance(steps, list) or len(steps) != horizon:
        got = len(steps) if isinstance(steps, list) else type(steps).__name__
        raise SchemaViolation(f"expected {horizon} steps, got {got}", index)

    actions, xs = [], []
    for s, step in enumerate(steps, start=1):
        if not isinstance(step, dict) or set(step) != {"a", "x"}:
            raise SchemaViolation(f"step {s} must have exactly the fields 'a' and 'x'", index)
        a = step["a"]
        if isinstance(a, bool) or not isinstance(a, int):
            raise SchemaViolation(f"step {s}: action must be an integer, got {a!r}", index)
        if not 0 <= a < schema.action_cardinalities[s - 1]:
            raise SchemaViolation(
                f"step {s}: action {a} out of range [0, {schema.action_cardinalities[s - 1]})", index
            )
        actions.append(a)
        xs.append(_check_vector(step["x"], schema.step_features, f"steps[{s}].x", index))
    return x0, actions, xs


def parse_lines(lines: Iterable[str], schema: FeatureSchema, horizon: Optional[int] = None,
                first_line: int = 1):
    """Decode and validate JSON lines; yields (x0, actions, xs) per record"""
    index = 0
    for lineno, line in enumerate(lines, start=first_line):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"malformed JSON: {e.msg}", lineno)
        yield validate_record(schema, data, index, horizon)
        index += 1


def load_dataset(path: str, schema: FeatureSchema, provenance: Optional[str] = None) -> TrajectoryDataset:
    """Load newline-delimited JSON trajectories and validate them"""
    file_path = Path(path)
    if not file_path.exists():
        raise ValidationError(f"Dataset file not found: {path}")

    x0s, actions, xs = [], [], []
    with file_path.open(encoding="utf-8") as handle:
        for x0, a, x in parse_lines(handle, schema):
            x0s.append(x0)
            actions.append(a)
            xs.append(x)

    n = len(x0s)
    dataset = TrajectoryDataset(
        schema,
        np.array(x0s, dtype=float).reshape(n, schema.x0_dim),
        np.array(actions, dtype=np.int64).reshape(n, schema.horizon),
        np.array(xs, dtype=float).reshape(n, schema.horizon, schema.step_dim),
        provenance if provenance is not None else str(path),
    )
    logger.info(f"Loaded {n} trajectories from {path}")
    return dataset


def dump_dataset(dataset: TrajectoryDataset, path: str):
    """Write the canonical newline-delimited JSON form"""
    lines = dataset.lines()
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    logger.debug(f"Wrote {len(lines)} trajectories to {path}")


def split_dataset(d: TrajectoryDataset, held_out_fraction: float,
                  seed: int) -> Tuple[TrajectoryDataset, TrajectoryDataset]:
    """Random disjoint split into (d0, d_main) with |d0| = round(fraction * |d|)"""
    if not 0.0 <= held_out_fraction <= 1.0:
        raise ValidationError(f"held_out_fraction must lie in [0, 1], got {held_out_fraction}")
    n = len(d)
    n0 = int(math.floor(held_out_fraction * n + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    held_out = np.sort(perm[:n0])
    main = np.sort(perm[n0:])
    logger.info(f"Split {n} trajectories into {len(held_out)} held-out and {len(main)} main")
    return (
        d.subset(held_out, provenance=f"{d.provenance}#held_out"),
        d.subset(main, provenance=f"{d.provenance}#main"),
    )
