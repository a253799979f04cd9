"""Assessment report: per-hypothesis outcomes, tables and plot data"""

import csv
import io
import json
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..stats.falsification import TestOutcome

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["quantity", "hypotheses", "rejections", "rejections_lo", "rejections_up", "skipped"]


def _neg_log10(p: float) -> float:
    return float(-np.log10(p))


def quantity_table(outcomes: List[TestOutcome]) -> List[Dict[str, Any]]:
    """Hypotheses tested and Holm rejections per quantity"""
    rows: "OrderedDict[str, Dict[str, Any]]" = OrderedDict()
    for outcome in outcomes:
        label = outcome.spec.label
        row = rows.setdefault(label, {c: 0 for c in TABLE_COLUMNS[1:]})
        if not outcome.tested:
            row["skipped"] += 1
            continue
        row["hypotheses"] += 1
        row["rejections_lo"] += int(outcome.holm_reject_lo)
        row["rejections_up"] += int(outcome.holm_reject_up)
        row["rejections"] += int(outcome.holm_reject_lo or outcome.holm_reject_up)
    return [{"quantity": label, **row} for label, row in sorted(rows.items())]


def p_value_arrays(outcomes: List[TestOutcome]) -> Dict[str, Dict[str, List[float]]]:
    """-log10 p per quantity and side over tested hypotheses"""
    arrays: Dict[str, Dict[str, List[float]]] = {}
    for outcome in outcomes:
        if outcome.tested:
            entry = arrays.setdefault(outcome.spec.label, {"lo": [], "up": []})
            entry["lo"].append(_neg_log10(outcome.p_lo))
            entry["up"].append(_neg_log10(outcome.p_up))
    return dict(sorted(arrays.items()))


def _histogram(values: np.ndarray, edges: np.ndarray) -> Dict[str, Any]:
    counts, _ = np.histogram(values, bins=edges)
    n = max(len(values), 1)
    p = counts / n
    half_width = 1.96 * np.sqrt(p * (1 - p) / n)
    return {
        "n": int(len(values)),
        "counts": counts.tolist(),
        "proportions": p.tolist(),
        "ci_lower": np.maximum(p - half_width, 0.0).tolist(),
        "ci_upper": np.minimum(p + half_width, 1.0).tolist(),
    }


def outcome_histogram(outcome: TestOutcome, bins: int = 20, truncate: bool = True) -> Optional[Dict[str, Any]]:
    """Raw (unclipped) observed vs twin values for one tested hypothesis.

    With ``truncate`` the axis spans the .025 and .975 quantiles of the
    observational values.
    """
    obs = np.asarray(outcome.obs.agree_raw, dtype=float)
    twin = np.asarray(outcome.twin.raw, dtype=float)
    if obs.size == 0 or twin.size == 0:
        return None
    if truncate:
        lo, hi = np.quantile(obs, [0.025, 0.975])
    else:
        lo, hi = min(obs.min(), twin.min()), max(obs.max(), twin.max())
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    return {
        "id": outcome.spec.spec_id,
        "edges": edges.tolist(),
        "truncated": truncate,
        "observational": _histogram(obs, edges),
        "twin": _histogram(twin, edges),
        "y_lo": outcome.spec.outcome.y_lo,
        "y_up": outcome.spec.outcome.y_up,
    }


def sample_size_histograms(outcomes: List[TestOutcome], bins: int = 20) -> Dict[str, Any]:
    """Histograms of n and n_hat per quantity over tested hypotheses"""
    out: Dict[str, Any] = {}
    labels = sorted({o.spec.label for o in outcomes if o.tested})
    for label in labels:
        tested = [o for o in outcomes if o.tested and o.spec.label == label]
        entry = {}
        for name, values in (("n", [o.n for o in tested]), ("n_hat", [o.n_hat for o in tested])):
            counts, edges = np.histogram(values, bins=bins)
            entry[name] = {"counts": counts.tolist(), "edges": edges.tolist()}
        out[label] = entry
    return out


@dataclass
class AssessmentReport:
    metadata: Dict[str, Any]
    outcomes: List[TestOutcome] = field(default_factory=list)
    longitudinal: List[Dict[str, Any]] = field(default_factory=list)
    sweep: List[Dict[str, Any]] = field(default_factory=list)
    histogram_bins: int = 20
    histogram_truncation: bool = True
    stage: Optional[str] = None

    @property
    def table(self) -> List[Dict[str, Any]]:
        return quantity_table(self.outcomes)

    @property
    def rejections(self) -> int:
        return sum(int(o.holm_reject_lo) + int(o.holm_reject_up) for o in self.outcomes)

    def to_dict(self) -> Dict[str, Any]:
        histograms = []
        for outcome in self.outcomes:
            if outcome.holm_reject_lo or outcome.holm_reject_up:
                h = outcome_histogram(outcome, self.histogram_bins, self.histogram_truncation)
                if h is not None:
                    histograms.append(h)
        data = {
            "metadata": self.metadata,
            "table": self.table,
            "hypotheses": [o.to_dict() for o in self.outcomes],
            "p_values": p_value_arrays(self.outcomes),
            "sample_sizes": sample_size_histograms(self.outcomes, self.histogram_bins),
            "histograms": histograms,
            "longitudinal": self.longitudinal,
            "sweep": self.sweep,
        }
        if self.stage is not None:
            data["failed_stage"] = self.stage
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=False)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=TABLE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.table)
        return buffer.getvalue()

    def write(self, path: str):
        """JSON report at ``path`` and the quantity table next to it as CSV"""
        target = Path(path)
        target.write_text(self.to_json() + "\n", encoding="utf-8")
        target.with_suffix(".csv").write_text(self.to_csv(), encoding="utf-8")
        logger.info(f"Wrote report to {target} and {target.with_suffix('.csv')}")
