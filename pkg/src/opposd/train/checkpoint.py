"""
opposd.train.checkpoint — Immutable per-update training checkpoints.

    <run>/checkpoints/
        ckpt-000000/        warm start
            actor.bin  actor.json
            critic.bin critic.json
            ratio.bin  ratio.json      (OPPOSD only)
            state.json                 update index, rng state, metrics row
        ckpt-000100/
        ...

Each checkpoint is written to a hidden temp directory and renamed into
place, so a directory that exists is complete. Update indices only grow.
"""

from __future__ import annotations

import json
import logging
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from opposd.actor.model import ActorModel, load_actor_model, save_actor_model
from opposd.critic.model import CriticModel, load_critic_model, save_critic_model
from opposd.nn.checkpoint import CheckpointError
from opposd.ratio.model import RatioModel, load_ratio_model, save_ratio_model
from opposd.utils import atomic_publish_dir, restore_rng, rng_state

logger = logging.getLogger(__name__)

CKPT_PATTERN = re.compile(r"^ckpt-(\d{6,})$")


@dataclass
class CheckpointRecord:
    checkpoint_id: str
    update_index: int
    path: Path


@dataclass
class TrainingState:
    update_index: int
    actor: ActorModel
    critic: CriticModel
    ratio: RatioModel | None
    rng: np.random.Generator
    metrics: dict[str, Any]


def checkpoint_id(update_index: int) -> str:
    return f"ckpt-{update_index:06d}"


class CheckpointStore:
    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)

    def records(self) -> list[CheckpointRecord]:
        """Published checkpoints in update order."""
        if not self.directory.is_dir():
            return []
        out = []
        for p in self.directory.iterdir():
            m = CKPT_PATTERN.match(p.name)
            if m and p.is_dir():
                out.append(CheckpointRecord(p.name, int(m.group(1)), p))
        return sorted(out, key=lambda r: r.update_index)

    def latest(self) -> CheckpointRecord | None:
        recs = self.records()
        return recs[-1] if recs else None

    def write(
        self,
        update_index: int,
        actor: ActorModel,
        critic: CriticModel,
        ratio: RatioModel | None,
        rng: np.random.Generator,
        metrics: dict[str, Any] | None = None,
    ) -> CheckpointRecord:
        last = self.latest()
        if last is not None and update_index <= last.update_index:
            raise CheckpointError(
                f"Checkpoint update index {update_index} is not after {last.update_index}"
            )
        self.directory.mkdir(parents=True, exist_ok=True)
        cid = checkpoint_id(update_index)
        tmp = Path(tempfile.mkdtemp(dir=self.directory, prefix=f".{cid}."))
        save_actor_model(actor, tmp / "actor")
        save_critic_model(critic, tmp / "critic")
        if ratio is not None:
            save_ratio_model(ratio, tmp / "ratio")
        state = {
            "update_index": update_index,
            "rng_state": rng_state(rng),
            "metrics": metrics or {},
        }
        (tmp / "state.json").write_text(json.dumps(state, indent=2, sort_keys=True))
        final = self.directory / cid
        atomic_publish_dir(tmp, final)
        logger.debug("Wrote checkpoint %s", final)
        return CheckpointRecord(cid, update_index, final)

    def load(self, record: CheckpointRecord) -> TrainingState:
        state_path = record.path / "state.json"
        if not state_path.exists():
            raise CheckpointError(f"Checkpoint state not found: {state_path}")
        state = json.loads(state_path.read_text())
        ratio_stem = record.path / "ratio"
        return TrainingState(
            update_index=int(state["update_index"]),
            actor=load_actor_model(record.path / "actor"),
            critic=load_critic_model(record.path / "critic"),
            ratio=load_ratio_model(ratio_stem) if ratio_stem.with_suffix(".json").exists() else None,
            rng=restore_rng(state["rng_state"]),
            metrics=state.get("metrics", {}),
        )

    def load_actor(self, record: CheckpointRecord) -> ActorModel:
        return load_actor_model(record.path / "actor")

    def load_ratio(self, record: CheckpointRecord) -> RatioModel | None:
        stem = record.path / "ratio"
        return load_ratio_model(stem) if stem.with_suffix(".json").exists() else None
