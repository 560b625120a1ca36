"""
opposd.config.values — Configuration values merge logic.

Value precedence (low to high):
  defaults.yaml (package) → presets → -f run.yaml → -f run2.yaml → --set key=val

Deep merge: nested mappings are merged, scalars and lists are overridden.
"""

from __future__ import annotations

import copy
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from opposd.errors import ConfigError


def deep_merge(base: dict, override: dict) -> dict:
    """Deep merge two dicts. Override wins.

    >>> deep_merge({"train": {"gamma": 1.0, "lam": 0.0}}, {"train": {"gamma": 0.98}})
    {'train': {'gamma': 0.98, 'lam': 0.0}}
    """
    result = copy.deepcopy(base)
    for key, value in override.items():
        if (
            key in result
            and isinstance(result[key], dict)
            and isinstance(value, dict)
        ):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = copy.deepcopy(value)
    return result


def _parse_yaml(text: str, source: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {source}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source} must be a YAML mapping")
    return data


def load_values_file(path: str | Path) -> dict:
    """Read a YAML configuration file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"Config file not found: {p}")
    return _parse_yaml(p.read_text(), str(p))


def load_defaults() -> dict:
    """The packaged defaults.yaml."""
    text = resources.files("opposd.config").joinpath("defaults.yaml").read_text()
    return _parse_yaml(text, "defaults.yaml")


def parse_set_values(set_args: list[str]) -> dict:
    """Convert --set key=value arguments to a nested dict.

    >>> parse_set_values(["seed=3", "train.gamma=0.98"])
    {'seed': 3, 'train': {'gamma': 0.98}}
    """
    result: dict = {}
    for arg in set_args:
        if "=" not in arg:
            raise ConfigError(f"Invalid --set format: '{arg}' (expected key=value)")
        key, value = arg.split("=", 1)
        parts = key.split(".")
        current = result
        for part in parts[:-1]:
            current = current.setdefault(part, {})
            if not isinstance(current, dict):
                raise ConfigError(f"Conflicting --set keys at '{key}'")
        current[parts[-1]] = _coerce_value(value)
    return result


def _coerce_value(value: str) -> Any:
    """Convert a string value to the appropriate Python type.

    >>> _coerce_value("500")
    500
    >>> _coerce_value("true")
    True
    >>> _coerce_value("1e-3")
    0.001
    >>> _coerce_value("[16, 16]")
    [16, 16]
    >>> _coerce_value("median")
    'median'
    """
    if value.lower() == "true":
        return True
    if value.lower() == "false":
        return False
    if value.lower() == "null" or value.lower() == "none":
        return None
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    if value.startswith("[") and value.endswith("]"):
        inner = value[1:-1].strip()
        return [_coerce_value(v.strip()) for v in inner.split(",")] if inner else []
    return value


def merge_all_values(
    defaults: dict,
    value_files: list[str | Path],
    set_args: list[str],
) -> dict:
    """Merge all value sources.

    Precedence (low to high):
      defaults → value_files (in order) → set_args
    """
    result = copy.deepcopy(defaults)
    for vf in value_files:
        result = deep_merge(result, load_values_file(vf))
    if set_args:
        result = deep_merge(result, parse_set_values(set_args))
    return result


def flatten_values(values: dict, prefix: str = "") -> dict[str, Any]:
    """Dotted-key view of a nested mapping.

    >>> flatten_values({"train": {"gamma": 1.0}, "seed": None})
    {'train.gamma': 1.0, 'seed': None}
    """
    out: dict[str, Any] = {}
    for key, value in values.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict) and value:
            out.update(flatten_values(value, f"{dotted}."))
        else:
            out[dotted] = value
    return out
