"""
opposd.config.presets — Preset overlays.

Preset resolution priority:
    --preset flag > OPPOSD_PRESET env var > None (defaults only)

A preset maps to an overlay shipped with the package:
    --preset discounted   → opposd/config/presets/discounted.yaml
    --preset hard_example → opposd/config/presets/hard_example.yaml

Multiple presets compose in order:
    --preset hard_example --preset mine → hard_example.yaml + mine.yaml

A preset name may also be a path to a YAML file.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from opposd.config.values import _parse_yaml, load_values_file
from opposd.errors import ConfigError

PRESET_ENV = "OPPOSD_PRESET"


def resolve_presets(flag_presets: list[str] | tuple[str, ...] | None = None) -> list[str]:
    """Resolve the preset list. Priority: flag > env var > empty."""
    if flag_presets:
        return list(flag_presets)

    env_preset = os.environ.get(PRESET_ENV, "").strip()
    if env_preset:
        # Comma-separated: OPPOSD_PRESET=discounted,mine
        return [p.strip() for p in env_preset.split(",") if p.strip()]

    return []


def list_presets() -> list[str]:
    """Names of the presets shipped with the package."""
    root = resources.files("opposd.config").joinpath("presets")
    return sorted(
        entry.name.removesuffix(".yaml")
        for entry in root.iterdir()
        if entry.name.endswith(".yaml")
    )


def load_preset(name: str) -> dict:
    """Values of a shipped preset, or of a YAML file path."""
    entry = resources.files("opposd.config").joinpath("presets", f"{name}.yaml")
    if entry.is_file():
        return _parse_yaml(entry.read_text(), f"preset '{name}'")
    if name.endswith((".yaml", ".yml")) and Path(name).exists():
        return load_values_file(name)
    known = ", ".join(list_presets())
    raise ConfigError(f"Unknown preset '{name}' (known: {known})", field="preset")
