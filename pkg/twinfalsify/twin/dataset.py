"""Twin trajectory datasets D^(a_{1:t})"""

import json
import hashlib
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..data.dataset import ObservationalTrajectory, Step, parse_lines
from ..data.schema import FeatureSchema
from ..errors import ParseError, SchemaViolation, ValidationError

logger = logging.getLogger(__name__)


class TwinDataset:
    """Twin trajectories (x0, x^_{1:t}) generated under one action sequence.

    ``x0`` has shape (m, d0) and ``x`` shape (m, t, d) with t = len(tag).
    """

    def __init__(self, tag: Sequence[int], schema: FeatureSchema, x0: np.ndarray,
                 x: np.ndarray, metadata: Optional[Dict[str, Any]] = None):
        self.tag: Tuple[int, ...] = tuple(int(a) for a in tag)
        if not 1 <= len(self.tag) <= schema.horizon:
            raise ValidationError(f"Twin action tag {self.tag} does not fit horizon {schema.horizon}")
        for s, a in enumerate(self.tag):
            if not 0 <= a < schema.action_cardinalities[s]:
                raise ValidationError(f"Twin action tag {self.tag}: action {a} out of range at step {s + 1}")
        m = len(x0)
        self.schema = schema
        self.metadata = dict(metadata or {})
        self.x0 = np.array(x0, dtype=float).reshape(m, schema.x0_dim)
        self.x = np.array(x, dtype=float).reshape(m, len(self.tag), schema.step_dim)
        self.x0.setflags(write=False)
        self.x.setflags(write=False)

    def __len__(self) -> int:
        return len(self.x0)

    def __repr__(self) -> str:
        return f"TwinDataset(tag={self.tag}, m={len(self)}, twin={self.metadata.get('twin_id')!r})"

    @property
    def horizon(self) -> int:
        return len(self.tag)

    @property
    def actions(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.tag, dtype=np.int64), (len(self), self.horizon))

    @property
    def records(self) -> Tuple[ObservationalTrajectory, ...]:
        return tuple(
            ObservationalTrajectory(
                tuple(self.x0[i].tolist()),
                tuple(Step(a, tuple(xs.tolist())) for a, xs in zip(self.tag, self.x[i])),
            )
            for i in range(len(self))
        )

    def digest(self) -> str:
        h = hashlib.sha256(json.dumps(list(self.tag)).encode("utf-8"))
        h.update(np.ascontiguousarray(self.x0).tobytes())
        h.update(np.ascontiguousarray(self.x).tobytes())
        return h.hexdigest()


def tag_name(tag: Sequence[int]) -> str:
    return "-".join(str(a) for a in tag)


def dump_twin_dataset(d: TwinDataset, path: str):
    """Header line with tag and metadata, then one trajectory per line"""
    header = json.dumps({"tag": list(d.tag), "metadata": d.metadata}, sort_keys=True, separators=(",", ":"))
    lines = [header] + [json.dumps(r.to_dict(), separators=(",", ":")) for r in d.records]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    logger.debug(f"Wrote {len(d)} twin trajectories to {path}")


def load_twin_dataset(path: str, schema: FeatureSchema) -> TwinDataset:
    """Read a dumped twin dataset; step values are checked as finite numbers only"""
    file_path = Path(path)
    if not file_path.exists():
        raise ValidationError(f"Twin dataset not found: {path}")
    with file_path.open(encoding="utf-8") as handle:
        first = handle.readline()
        try:
            header = json.loads(first)
            tag = tuple(header["tag"])
            metadata = header.get("metadata", {})
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ParseError("missing or malformed twin header", 1)
        x0s, xs = [], []
        for index, (x0, actions, x) in enumerate(parse_lines(handle, schema.relaxed(), len(tag), first_line=2)):
            if tuple(actions) != tag:
                raise SchemaViolation(f"actions {actions} differ from tag {list(tag)}", index)
            x0s.append(x0)
            xs.append(x)
    m = len(x0s)
    dataset = TwinDataset(tag, schema, np.array(x0s, dtype=float).reshape(m, schema.x0_dim),
                          np.array(xs, dtype=float).reshape(m, len(tag), schema.step_dim), metadata)
    logger.info(f"Loaded {m} twin trajectories for a={list(tag)} from {path}")
    return dataset
