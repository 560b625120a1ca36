"""
opposd.data.io — JSON-lines dataset files.

Line 1 is the header, every following line one trajectory:

    {"format": "opposd-dataset", "version": "1.0.0", "n_trajectories": 500,
     "horizon": 200, "n_actions": 2, "state_dim": 4, "epsilon": 0.0,
     "sentinel_ok": false, "normalization": {"mean": [...], "std": [...]},
     "meta": {...}}
    {"states": [[...], ...], "actions": [...], "rewards": [...], ...}

Reals are written with Python's shortest round-trip repr, so save -> load
is bit-exact. A reader accepts any file with the same major version.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import semver

from opposd.data.dataset import (
    BOOL_FIELDS, STEP_FIELDS, Dataset, DatasetError, NormalizationStats, empty_steps,
)
from opposd.utils import atomic_write_text

FORMAT_NAME = "opposd-dataset"
FORMAT_VERSION = "1.0.0"


class DatasetParseError(DatasetError):
    """Malformed dataset file."""

    def __init__(self, message: str, line: int, offset: int = 0):
        self.line = line
        self.offset = offset
        super().__init__(f"line {line}, offset {offset}: {message}")


class UnsupportedVersionError(DatasetError):
    """Dataset file written by an incompatible format version."""
    pass


def _header(dataset: Dataset) -> dict[str, Any]:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n_trajectories": dataset.n_trajectories,
        "horizon": dataset.horizon,
        "n_actions": dataset.n_actions,
        "state_dim": dataset.state_dim,
        "epsilon": dataset.smoothing_epsilon,
        "sentinel_ok": dataset.sentinel_ok,
        "normalization": dataset.normalization.to_dict(),
        "meta": dataset.meta,
    }


def dumps_dataset(dataset: Dataset) -> str:
    lines = [json.dumps(_header(dataset), sort_keys=True)]
    for i in range(dataset.n_trajectories):
        record = {name: getattr(dataset, name)[i].tolist() for name in STEP_FIELDS}
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + "\n"


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    atomic_write_text(path, dumps_dataset(dataset))


def _parse_line(text: str, lineno: int) -> dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetParseError(e.msg, line=lineno, offset=e.pos) from e
    if not isinstance(data, dict):
        raise DatasetParseError("expected a JSON object", line=lineno)
    return data


def _check_version(header: dict[str, Any]) -> None:
    if header.get("format") != FORMAT_NAME:
        raise DatasetParseError(f"not an {FORMAT_NAME} file", line=1)
    raw = header.get("version")
    try:
        version = semver.Version.parse(str(raw))
    except ValueError as e:
        raise DatasetParseError(f"invalid version {raw!r}", line=1) from e
    if version.major != semver.Version.parse(FORMAT_VERSION).major:
        raise UnsupportedVersionError(
            f"Dataset version {version} is not supported (reader supports {FORMAT_VERSION})"
        )


def loads_dataset(text: str) -> Dataset:
    lines = text.splitlines()
    if not lines:
        raise DatasetParseError("empty file", line=1)
    header = _parse_line(lines[0], 1)
    _check_version(header)
    try:
        n = int(header["n_trajectories"])
        horizon = int(header["horizon"])
        state_dim = int(header["state_dim"])
        n_actions = int(header["n_actions"])
    except (KeyError, TypeError, ValueError) as e:
        raise DatasetParseError(f"bad header field: {e}", line=1) from e

    body = lines[1:]
    if len(body) < n:
        raise DatasetParseError(
            f"truncated file: header announces {n} trajectories, found {len(body)}",
            line=len(lines) + 1,
        )

    steps = empty_steps(n, horizon, state_dim)
    for i in range(n):
        lineno = i + 2
        record = _parse_line(body[i], lineno)
        for name in STEP_FIELDS:
            if name not in record:
                raise DatasetParseError(f"missing field '{name}'", line=lineno)
            dtype = bool if name in BOOL_FIELDS else steps[name].dtype
            arr = np.array(record[name], dtype=dtype)
            if arr.shape != steps[name].shape[1:]:
                raise DatasetParseError(
                    f"field '{name}' has shape {arr.shape}, expected {steps[name].shape[1:]}",
                    line=lineno,
                )
            steps[name][i] = arr

    return Dataset(
        **steps,
        n_actions=n_actions,
        smoothing_epsilon=float(header.get("epsilon", 0.0)),
        normalization=NormalizationStats.from_dict(header["normalization"])
        if header.get("normalization") else None,
        sentinel_ok=bool(header.get("sentinel_ok", False)),
        meta=header.get("meta") or {},
    )


def load_dataset(path: str | Path) -> Dataset:
    p = Path(path)
    if not p.exists():
        raise DatasetError(f"Dataset file not found: {p}")
    raw = p.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        lineno = raw.count(b"\n", 0, e.start) + 1
        offset = e.start - (raw.rfind(b"\n", 0, e.start) + 1)
        raise DatasetParseError(f"invalid UTF-8: {e.reason}", line=lineno, offset=offset) from e
    return loads_dataset(text)
