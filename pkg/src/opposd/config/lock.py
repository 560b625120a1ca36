"""
opposd.config.lock — run.lock file management.

run.lock format:

    apiVersion: opposd/v1
    kind: RunLock
    command: train
    seed: 0
    checksum: sha256:abc123...    # hash of the resolved configuration
    inputs:
      dataset: {path: /data/cartpole.jsonl, checksum: sha256:def456...}
    config: {...}                 # the fully resolved configuration

Inputs are re-hashed on resume; any change is drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from opposd.errors import OpposdError
from opposd.utils import atomic_write_text, file_checksum, text_checksum

API_VERSION = "opposd/v1"
LOCK_NAME = "run.lock"


class RunLockError(OpposdError):
    """Lock file error."""
    pass


@dataclass
class RunLock:
    """Parsed run.lock."""
    command: str
    seed: int
    checksum: str
    config: dict[str, Any] = field(default_factory=dict)
    inputs: dict[str, dict[str, str]] = field(default_factory=dict)

    @property
    def short_id(self) -> str:
        """First 12 hex digits of the config checksum."""
        return self.checksum.split(":", 1)[-1][:12]


def config_checksum(config: dict[str, Any]) -> str:
    """Checksum of a resolved configuration (key order independent)."""
    return text_checksum(yaml.safe_dump(config, sort_keys=True, default_flow_style=False))


def input_entry(path: str | Path) -> dict[str, str]:
    p = Path(path).resolve()
    return {"path": str(p), "checksum": file_checksum(p)}


def parse_lock(path: str | Path) -> RunLock:
    """Parse a run.lock file (or the run.lock inside a run directory)."""
    p = Path(path)
    if p.is_dir():
        p = p / LOCK_NAME
    if not p.exists():
        raise RunLockError(f"Lock file not found: {p}")

    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as e:
        raise RunLockError(f"Invalid YAML in lock file {p}: {e}") from e

    if not isinstance(data, dict):
        raise RunLockError(f"Lock file must be a YAML mapping: {p}")
    if data.get("apiVersion") != API_VERSION or data.get("kind") != "RunLock":
        raise RunLockError(
            f"{p} is not a {API_VERSION} RunLock "
            f"(apiVersion={data.get('apiVersion')!r}, kind={data.get('kind')!r})"
        )
    for key in ("command", "seed", "checksum"):
        if key not in data:
            raise RunLockError(f"Lock file is missing '{key}': {p}")

    return RunLock(
        command=data["command"],
        seed=int(data["seed"]),
        checksum=data["checksum"],
        config=data.get("config") or {},
        inputs=data.get("inputs") or {},
    )


def write_lock(lock: RunLock, path: str | Path) -> None:
    """Write a run.lock file."""
    data: dict[str, Any] = {
        "apiVersion": API_VERSION,
        "kind": "RunLock",
        "command": lock.command,
        "seed": lock.seed,
        "checksum": lock.checksum,
    }
    if lock.inputs:
        data["inputs"] = lock.inputs
    data["config"] = lock.config
    atomic_write_text(path, yaml.safe_dump(data, default_flow_style=False, sort_keys=False))


def check_drift(lock: RunLock) -> list[str]:
    """Names of inputs whose file changed or vanished since the lock was written."""
    drifted = []
    for name, entry in lock.inputs.items():
        p = Path(entry["path"])
        if not p.exists() or file_checksum(p) != entry["checksum"]:
            drifted.append(name)
    if config_checksum(lock.config) != lock.checksum:
        drifted.append("config")
    return drifted
