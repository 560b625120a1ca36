"""
opposd.nn.checkpoint — Network checkpoint files.

A checkpoint is a pair ``<stem>.bin`` + ``<stem>.json``.

Binary layout (all integers and reals little-endian)::

    magic       4 bytes   b"OPNN"
    version     u32       format major version
    count       u32       number of matrices
    count times:
        name_len  u16
        name      name_len bytes, UTF-8
        rows      u32
        cols      u32
        data      rows * cols float64, row-major

Matrix names: ``W<i>``/``b<i>`` for parameters, ``adam.m.<name>`` and
``adam.v.<name>`` for optimizer moments.

The JSON sidecar records format/version, layer_sizes, head, the matrix
names in file order, scalar optimizer state and a free ``extra`` mapping
(kernel config, normalization, ...).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np
import semver

from opposd.errors import OpposdError
from opposd.nn.adam import AdamState
from opposd.nn.mlp import DenseMatrix, MlpParams

MAGIC = b"OPNN"
FORMAT_NAME = "opposd-mlp"
FORMAT_VERSION = "1.0.0"


class CheckpointError(OpposdError):
    """Unreadable or incompatible checkpoint."""
    pass


def _write_matrices(path: Path, named: list[tuple[str, DenseMatrix]]) -> None:
    major = semver.Version.parse(FORMAT_VERSION).major
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", major, len(named)))
        for name, m in named:
            raw = name.encode("utf-8")
            rows, cols = m.shape
            f.write(struct.pack("<H", len(raw)))
            f.write(raw)
            f.write(struct.pack("<II", rows, cols))
            f.write(np.ascontiguousarray(m, dtype="<f8").tobytes())


def _read_matrices(path: Path) -> dict[str, DenseMatrix]:
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {data[:4]!r}")
    offset = 4
    try:
        major, count = struct.unpack_from("<II", data, offset)
        offset += 8
        if major != semver.Version.parse(FORMAT_VERSION).major:
            raise CheckpointError(f"{path}: unsupported binary version {major}")
        out: dict[str, DenseMatrix] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", data, offset)
            offset += 2
            name = data[offset:offset + name_len].decode("utf-8")
            offset += name_len
            rows, cols = struct.unpack_from("<II", data, offset)
            offset += 8
            n_bytes = rows * cols * 8
            if offset + n_bytes > len(data):
                raise CheckpointError(f"{path}: truncated matrix '{name}'")
            out[name] = np.frombuffer(
                data, dtype="<f8", count=rows * cols, offset=offset,
            ).astype(np.float64).reshape(rows, cols)
            offset += n_bytes
    except struct.error as e:
        raise CheckpointError(f"{path}: truncated header at byte {offset}") from e
    return out


def save_params(
    stem: str | Path,
    params: MlpParams,
    optimizer: AdamState | None = None,
    extra: dict[str, Any] | None = None,
) -> None:
    """Write ``<stem>.bin`` and ``<stem>.json``."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    named = list(zip(params.names(), params.arrays()))
    opt_meta = None
    if optimizer is not None:
        for name, m in zip(params.names(), optimizer.first_moment):
            named.append((f"adam.m.{name}", m))
        for name, v in zip(params.names(), optimizer.second_moment):
            named.append((f"adam.v.{name}", v))
        opt_meta = {
            "learning_rate": optimizer.learning_rate,
            "beta1": optimizer.beta1,
            "beta2": optimizer.beta2,
            "eps_stability": optimizer.eps_stability,
            "weight_decay": optimizer.weight_decay,
            "step_count": optimizer.step_count,
        }
    _write_matrices(stem.with_suffix(".bin"), named)
    sidecar = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "layer_sizes": list(params.layer_sizes),
        "head": params.head,
        "matrices": [n for n, _ in named],
        "optimizer": opt_meta,
        "extra": extra or {},
    }
    stem.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def load_params(stem: str | Path) -> tuple[MlpParams, AdamState | None, dict[str, Any]]:
    """Read a checkpoint written by :func:`save_params`."""
    stem = Path(stem)
    side_path = stem.with_suffix(".json")
    if not side_path.exists():
        raise CheckpointError(f"Checkpoint sidecar not found: {side_path}")
    try:
        sidecar = json.loads(side_path.read_text())
    except json.JSONDecodeError as e:
        raise CheckpointError(
            f"{side_path}: invalid JSON at line {e.lineno}, column {e.colno}"
        ) from e
    if sidecar.get("format") != FORMAT_NAME:
        raise CheckpointError(f"{side_path}: not an {FORMAT_NAME} checkpoint")
    version = semver.Version.parse(sidecar.get("version", "0.0.0"))
    if version.major != semver.Version.parse(FORMAT_VERSION).major:
        raise CheckpointError(
            f"{side_path}: unsupported checkpoint version {version} "
            f"(reader supports {FORMAT_VERSION})"
        )

    matrices = _read_matrices(stem.with_suffix(".bin"))
    sizes = [int(s) for s in sidecar["layer_sizes"]]
    n_layers = len(sizes) - 1
    try:
        params = MlpParams(
            layer_sizes=sizes,
            weights=[matrices[f"W{i}"].copy() for i in range(n_layers)],
            biases=[matrices[f"b{i}"].copy() for i in range(n_layers)],
            head=sidecar["head"],
        )
    except KeyError as e:
        raise CheckpointError(f"{stem}: missing matrix {e}") from e

    optimizer = None
    meta = sidecar.get("optimizer")
    if meta:
        names = params.names()
        optimizer = AdamState(
            learning_rate=meta["learning_rate"],
            beta1=meta["beta1"],
            beta2=meta["beta2"],
            eps_stability=meta["eps_stability"],
            weight_decay=meta["weight_decay"],
            step_count=meta["step_count"],
            first_moment=[matrices[f"adam.m.{n}"].copy() for n in names],
            second_moment=[matrices[f"adam.v.{n}"].copy() for n in names],
        )
    return params, optimizer, sidecar.get("extra", {})
