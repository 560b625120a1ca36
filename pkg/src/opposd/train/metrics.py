"""
opposd.train.metrics — Append-only metrics CSV.

    # algorithm=opposd discount_variant=average gamma=1.0 lam=0.0 seed=0
    actor_update,ratio_loss,critic_loss,entropy,grad_norm,z_w,mc_eval_mean,mc_eval_std
    0,0.0123,0.456,0.693,,,,
    ...

Missing values are empty cells.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any

METRIC_COLUMNS = (
    "actor_update", "ratio_loss", "critic_loss", "entropy",
    "grad_norm", "z_w", "mc_eval_mean", "mc_eval_std",
)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if value != value else repr(value)
    return str(value)


class MetricsWriter:
    def __init__(self, path: str | Path, header: dict[str, Any]) -> None:
        self.path = Path(path)
        if not self.path.exists():
            self.path.parent.mkdir(parents=True, exist_ok=True)
            line = " ".join(f"{k}={v}" for k, v in header.items())
            with open(self.path, "w", newline="") as f:
                f.write(f"# {line}\n")
                csv.writer(f).writerow(METRIC_COLUMNS)

    def append(self, row: dict[str, Any]) -> None:
        with open(self.path, "a", newline="") as f:
            csv.writer(f).writerow([_cell(row.get(c)) for c in METRIC_COLUMNS])

    def truncate_after(self, update_index: int) -> None:
        """Drop rows past ``update_index`` (resuming an interrupted run)."""
        lines = self.path.read_text().splitlines(keepends=True)
        kept = lines[:2]
        for line in lines[2:]:
            first = line.split(",", 1)[0]
            if first.strip() and int(first) <= update_index:
                kept.append(line)
        self.path.write_text("".join(kept))


def read_metrics(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """(header key/values, rows) of a metrics file."""
    text = Path(path).read_text()
    first, _, rest = text.partition("\n")
    header = dict(item.split("=", 1) for item in first.lstrip("# ").split() if "=" in item)
    rows = list(csv.DictReader(io.StringIO(rest)))
    return header, rows
