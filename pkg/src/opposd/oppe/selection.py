"""
opposd.oppe.selection — Checkpoint selection and the OPPE/Monte-Carlo report.

evaluations.csv:

    # estimator=self-normalized weighting=d_gamma gamma=1.0 refit_steps=500
    checkpoint_id,update_index,oppe_estimate,mc_estimate,mc_std,n_mc_episodes
    ckpt-000000,0,21.7,22.4,11.9,20
    ckpt-000100,100,35.2,,,0
    # pearson_r=0.8123

The footer is present only when at least three rows carry Monte-Carlo values
with non-zero variance on both sides.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.stats import pearsonr

from opposd.errors import OpposdError
from opposd.utils import atomic_write_text

EVALUATION_COLUMNS = (
    "checkpoint_id", "update_index", "oppe_estimate",
    "mc_estimate", "mc_std", "n_mc_episodes",
)
SCATTER_COLUMNS = ("checkpoint_id", "oppe_estimate", "mc_estimate")
MIN_CORRELATION_RECORDS = 3


class SelectionError(OpposdError):
    pass


class UndefinedCorrelationError(OpposdError):
    """Pearson r is undefined (too few points or a constant series)."""
    pass


@dataclass
class EvaluationRecord:
    checkpoint_id: str
    update_index: int
    oppe_estimate: float
    mc_estimate: float | None = None
    mc_std: float | None = None
    n_mc_episodes: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.oppe_estimate):
            raise SelectionError(
                f"{self.checkpoint_id}: OPPE estimate is not finite ({self.oppe_estimate})"
            )

    @property
    def has_mc(self) -> bool:
        return self.mc_estimate is not None


@dataclass
class CorrelationReport:
    pearson_r: float
    scatter: list[tuple[str, float, float]]


def select_best(records: list[EvaluationRecord]) -> EvaluationRecord:
    """Highest OPPE estimate; ties go to the later checkpoint."""
    if not records:
        raise SelectionError("No evaluation records to select from")
    return max(records, key=lambda r: (r.oppe_estimate, r.update_index))


def correlation_report(records: list[EvaluationRecord]) -> CorrelationReport:
    paired = [r for r in records if r.has_mc]
    if len(paired) < MIN_CORRELATION_RECORDS:
        raise UndefinedCorrelationError(
            f"Need at least {MIN_CORRELATION_RECORDS} records with Monte-Carlo values, "
            f"got {len(paired)}"
        )
    x = np.array([r.oppe_estimate for r in paired])
    y = np.array([r.mc_estimate for r in paired])
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise UndefinedCorrelationError("Zero variance in OPPE or Monte-Carlo estimates")
    r = float(pearsonr(x, y)[0])
    scatter = [(rec.checkpoint_id, rec.oppe_estimate, float(rec.mc_estimate)) for rec in paired]
    return CorrelationReport(r, scatter)


# ─────────────────────────────────────────────
# CSV
# ─────────────────────────────────────────────

def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps_evaluations(
    records: list[EvaluationRecord],
    header: dict[str, Any] | None = None,
    pearson_r: float | None = None,
) -> str:
    buf = io.StringIO()
    if header:
        buf.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EVALUATION_COLUMNS)
    for rec in records:
        writer.writerow([_cell(getattr(rec, c)) for c in EVALUATION_COLUMNS])
    if pearson_r is not None:
        buf.write(f"# pearson_r={pearson_r!r}\n")
    return buf.getvalue()


def write_evaluations(
    path: str | Path,
    records: list[EvaluationRecord],
    header: dict[str, Any] | None = None,
) -> float | None:
    """Write evaluations.csv (and the Pearson footer when defined); returns r."""
    try:
        r = correlation_report(records).pearson_r
    except UndefinedCorrelationError:
        r = None
    atomic_write_text(path, dumps_evaluations(records, header, r))
    return r


def write_scatter(path: str | Path, report: CorrelationReport) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCATTER_COLUMNS)
    for cid, oppe, mc in report.scatter:
        writer.writerow([cid, repr(oppe), repr(mc)])
    atomic_write_text(path, buf.getvalue())


def read_evaluations(path: str | Path) -> tuple[list[EvaluationRecord], float | None]:
    """Records and the Pearson footer (None when absent) of an evaluations.csv."""
    path = Path(path)
    if not path.exists():
        raise SelectionError(f"Evaluations file not found: {path}")
    pearson = None
    body = []
    for line in path.read_text().splitlines():
        if line.startswith("# pearson_r="):
            pearson = float(line.split("=", 1)[1])
        elif not line.startswith("#") and line.strip():
            body.append(line)
    records = []
    for row in csv.DictReader(body):
        try:
            records.append(EvaluationRecord(
                checkpoint_id=row["checkpoint_id"],
                update_index=int(row["update_index"]),
                oppe_estimate=float(row["oppe_estimate"]),
                mc_estimate=float(row["mc_estimate"]) if row["mc_estimate"] else None,
                mc_std=float(row["mc_std"]) if row["mc_std"] else None,
                n_mc_episodes=int(row["n_mc_episodes"] or 0),
            ))
        except (KeyError, ValueError) as e:
            raise SelectionError(f"{path}: malformed row {row}: {e}") from e
    return records, pearson
