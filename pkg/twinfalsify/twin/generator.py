"""Twin data generation: one session per X0 drawn without replacement"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from .dataset import TwinDataset
from .session import TwinFactory
from ..data.binning import ActionBinning
from ..data.dataset import TrajectoryDataset
from ..errors import TwinError, TwinFalsifyError, ValidationError

logger = logging.getLogger(__name__)


def _run_session(twin: TwinFactory, index: int, seed: int, x0: np.ndarray, actions: Sequence[int],
                 raw: List[Optional[List[float]]], step_dim: int) -> List[List[float]]:
    session = twin.create(index, seed)
    try:
        session.init(x0.tolist())
        path = []
        for s, (a, doses) in enumerate(zip(actions, raw), start=1):
            x = session.step(a, doses)
            if len(x) != step_dim or not all(math.isfinite(v) for v in x):
                raise TwinError(f"step {s} returned an invalid observation {x!r}", index)
            path.append([float(v) for v in x])
    except TwinError as e:
        if e.session_index is None:
            raise TwinError(str(e), index) from e
        raise
    except TwinFalsifyError as e:
        raise TwinError(str(e), index) from e
    finally:
        twin.release(session)
    logger.debug(f"Session {index} finished")
    return path


def generate_twin_dataset(d: TrajectoryDataset, actions: Sequence[int], twin: TwinFactory, m: int,
                          seed: int = 0, binning: Optional[ActionBinning] = None,
                          workers: int = 1) -> TwinDataset:
    """Simulate m trajectories under a_{1:t}, each from a distinct X0 of d.

    Sessions that consume raw doses receive the representative (median)
    dose of each action's bin. Results are ordered by session index.
    """
    actions = tuple(int(a) for a in actions)
    if m < 0 or m > len(d):
        raise ValidationError(f"Cannot draw {m} initial states without replacement from {len(d)}")
    if not 1 <= len(actions) <= d.schema.horizon:
        raise ValidationError(f"Action sequence {list(actions)} does not fit horizon {d.schema.horizon}")

    chosen = np.random.default_rng(seed).choice(len(d), size=m, replace=False)
    consumes_raw = twin.consumes_raw_doses
    if consumes_raw and binning is None:
        raise ValidationError(f"Twin {twin.twin_id} consumes raw doses but no action binning was given")
    raw = [binning.representative(a) if consumes_raw else None for a in actions]

    step_dim = d.schema.step_dim
    clamped_before = getattr(twin, "clamped_outputs", 0)
    if workers > 1 and m > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(
                lambda i: _run_session(twin, i, seed, d.x0[chosen[i]], actions, raw, step_dim), range(m)
            ))
    else:
        paths = [_run_session(twin, i, seed, d.x0[chosen[i]], actions, raw, step_dim) for i in range(m)]

    metadata = {**twin.metadata(), "seed": seed, "m": m}
    if "clamped_outputs" in metadata:
        metadata["clamped_outputs"] = twin.clamped_outputs - clamped_before
    if metadata.get("clamped_outputs"):
        logger.warning(f"{twin.twin_id}: {metadata['clamped_outputs']} outputs clamped to the support")
    dataset = TwinDataset(actions, d.schema, d.x0[chosen], np.asarray(paths, dtype=float).reshape(
        m, len(actions), step_dim), metadata)
    logger.info(f"Generated {m} twin trajectories for a={list(actions)} with {twin.twin_id}")
    return dataset
