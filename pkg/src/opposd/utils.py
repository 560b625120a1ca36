"""
opposd.utils — Small shared helpers.

Checksums (run lock drift detection), atomic writes (checkpoints,
datasets), finite checks and rng state round-tripping.
"""

from __future__ import annotations

import hashlib
import os
import shutil
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

from opposd.errors import NumericError


def file_checksum(path: str | Path) -> str:
    """Return ``sha256:<hex>`` of a file's bytes."""
    hasher = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            hasher.update(chunk)
    return f"sha256:{hasher.hexdigest()}"


def text_checksum(text: str) -> str:
    """Return ``sha256:<hex>`` of a string."""
    return f"sha256:{hashlib.sha256(text.encode()).hexdigest()}"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a text file via temp-file-then-rename."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=f".{p.name}.")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, p)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_publish_dir(tmp_dir: str | Path, final_dir: str | Path) -> None:
    """Rename a fully written temp directory into place.

    The final directory must not exist; published directories are immutable.
    """
    final = Path(final_dir)
    if final.exists():
        shutil.rmtree(tmp_dir, ignore_errors=True)
        raise FileExistsError(f"Refusing to overwrite {final}")
    os.replace(tmp_dir, final)


def ensure_finite(name: str, value: Any) -> None:
    """Raise NumericError if ``value`` holds NaN or inf."""
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = int(np.size(arr) - np.count_nonzero(np.isfinite(arr)))
        raise NumericError(f"{name}: {bad} non-finite value(s)")


def rng_state(rng: np.random.Generator) -> dict[str, Any]:
    """JSON-serializable snapshot of a Generator's state."""
    return rng.bit_generator.state


def restore_rng(state: dict[str, Any]) -> np.random.Generator:
    """Rebuild a Generator from :func:`rng_state` output."""
    name = state["bit_generator"]
    bit_gen = getattr(np.random, name)()
    bit_gen.state = state
    return np.random.Generator(bit_gen)
