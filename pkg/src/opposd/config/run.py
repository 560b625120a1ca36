"""
opposd.config.run — Typed run configuration.

The merged YAML mapping is validated into a RunConfig. Unknown keys, wrong
types and out-of-range values raise ConfigError naming the dotted field.
TrainConfig fields live under ``train``, ``actor``, ``critic``, ``ratio``
and ``data``; the table below maps each one to its YAML key.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from opposd.config.lock import LOCK_NAME, RunLock, config_checksum, input_entry, write_lock
from opposd.config.presets import load_preset, resolve_presets
from opposd.config.values import deep_merge, flatten_values, load_defaults, merge_all_values
from opposd.errors import ConfigError
from opposd.mdp.env import Env
from opposd.mdp.hard_example import aliased_features
from opposd.mdp.registry import TABULAR_PREFIX, make_env
from opposd.ratio.kernel import KernelConfig
from opposd.train.config import TrainConfig

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "OPPOSD_OUTPUT_DIR"

# TrainConfig field -> YAML key
TRAIN_FIELDS: dict[str, str] = {
    "algorithm": "train.algorithm",
    "discount_variant": "train.discount_variant",
    "gamma": "train.gamma",
    "lam": "train.lam",
    "entropy_coefficient": "train.entropy_coefficient",
    "bc_iterations": "train.bc_iterations",
    "total_actor_updates": "train.total_actor_updates",
    "checkpoint_interval": "train.checkpoint_interval",
    "normalize_states": "train.normalize_states",
    "mc_eval_interval": "train.mc_eval_interval",
    "mc_eval_episodes": "train.mc_eval_episodes",
    "actor_hidden": "actor.hidden",
    "lr_actor": "actor.lr",
    "batch_actor": "actor.batch_size",
    "critic_hidden": "critic.hidden",
    "lr_critic": "critic.lr",
    "batch_critic": "critic.batch_size",
    "n_critic": "critic.n_steps",
    "warm_start_critic": "critic.warm_start",
    "ratio_hidden": "ratio.hidden",
    "lr_ratio": "ratio.lr",
    "weight_decay_ratio": "ratio.weight_decay",
    "batch_ratio": "ratio.batch_size",
    "n_ratio": "ratio.n_steps",
    "warm_start_ratio": "ratio.warm_start",
    "bandwidth_mode": "ratio.bandwidth_mode",
    "bandwidth": "ratio.bandwidth",
    "n_trajectories": "data.n_trajectories",
    "epsilon_smoothing": "data.epsilon_smoothing",
}

PROJECTIONS: dict[str, Callable[[], np.ndarray]] = {
    "aliased": aliased_features,
}


@dataclass
class RunConfig:
    seed: int
    env: str
    horizon: int | None
    output_dir: Path
    train: TrainConfig
    dataset: Path | None = None
    eval_dataset: Path | None = None
    eval_n_trajectories: int = 500
    eval_seed_offset: int = 1
    simulator: bool = True
    mc_episodes: int = 20
    values: dict[str, Any] = field(default_factory=dict)

    @property
    def checksum(self) -> str:
        return config_checksum(self.values)

    def make_env(self) -> Env:
        return make_env(self.env, horizon=self.horizon, gamma=self.train.gamma)

    def run_lock(self, command: str, inputs: dict[str, Path] | None = None) -> RunLock:
        return RunLock(
            command=command,
            seed=self.seed,
            checksum=self.checksum,
            config=self.values,
            inputs={name: input_entry(p) for name, p in (inputs or {}).items()},
        )


# ─────────────────────────────────────────────
# Loading
# ─────────────────────────────────────────────

def resolve_values(
    presets: list[str] | tuple[str, ...] | None = None,
    value_files: list[str | Path] | None = None,
    set_args: list[str] | None = None,
) -> dict[str, Any]:
    """defaults → presets → -f files → --set, plus the output-dir env override."""
    values = load_defaults()
    for name in resolve_presets(presets):
        values = deep_merge(values, load_preset(name))
    values = merge_all_values(values, list(value_files or []), list(set_args or []))
    return apply_env_overrides(values)


def apply_env_overrides(values: dict[str, Any]) -> dict[str, Any]:
    """OPPOSD_OUTPUT_DIR replaces output_dir; no other value has an env override."""
    env_out = os.environ.get(OUTPUT_DIR_ENV, "").strip()
    if env_out:
        values = {**values, "output_dir": env_out}
    return values


def load_run_config(
    presets: list[str] | tuple[str, ...] | None = None,
    value_files: list[str | Path] | None = None,
    set_args: list[str] | None = None,
) -> RunConfig:
    return build_run_config(resolve_values(presets, value_files, set_args))


def _check_known(values: dict, schema: dict, prefix: str = "") -> None:
    for key, value in values.items():
        dotted = f"{prefix}{key}"
        if key not in schema:
            raise ConfigError("unknown configuration key", field=dotted)
        if isinstance(schema[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"expected a mapping, got {value!r}", field=dotted)
            _check_known(value, schema[key], f"{dotted}.")


def _expect(flat: dict[str, Any], key: str, kind: str, optional: bool = False) -> Any:
    value = flat.get(key)
    if value is None:
        if optional:
            return None
        raise ConfigError("is required", field=key)
    ok = {
        "bool": isinstance(value, bool),
        "int": isinstance(value, int) and not isinstance(value, bool),
        "float": isinstance(value, (int, float)) and not isinstance(value, bool),
        "str": isinstance(value, str),
        "list[int]": isinstance(value, list)
        and all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in value),
    }[kind]
    if not ok:
        raise ConfigError(f"expected {kind}, got {value!r}", field=key)
    return float(value) if kind == "float" else value


def _existing_path(flat: dict[str, Any], key: str) -> Path | None:
    value = _expect(flat, key, "str", optional=True)
    if value is None:
        return None
    p = Path(value)
    if not p.exists():
        raise ConfigError(f"file not found: {p}", field=key)
    return p


def build_run_config(values: dict[str, Any]) -> RunConfig:
    """Validate a merged mapping into a RunConfig."""
    _check_known(values, load_defaults())
    flat = flatten_values(values)

    kinds = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    kwargs: dict[str, Any] = {}
    for name, key in TRAIN_FIELDS.items():
        kwargs[name] = _expect(flat, key, kinds[name])

    projection = _expect(flat, "actor.projection", "str", optional=True)
    if projection is not None:
        if projection not in PROJECTIONS:
            raise ConfigError(f"'{projection}' is not one of {sorted(PROJECTIONS)}",
                              field="actor.projection")
        kwargs["actor_projection"] = PROJECTIONS[projection]()

    seed = _expect(flat, "seed", "int")
    if seed < 0:
        raise ConfigError(f"must be >= 0, got {seed}", field="seed")
    try:
        train = TrainConfig(seed=seed, **kwargs)
    except ConfigError as e:
        if e.field and e.field.startswith("train."):
            key = TRAIN_FIELDS.get(e.field.removeprefix("train."), e.field)
            raise ConfigError(e.reason, field=key) from e
        raise
    KernelConfig(bandwidth=train.bandwidth, bandwidth_mode=train.bandwidth_mode)

    env = _expect(flat, "env.name", "str")
    if env.startswith(TABULAR_PREFIX) and not Path(env[len(TABULAR_PREFIX):]).exists():
        raise ConfigError(f"tabular MDP file not found: {env[len(TABULAR_PREFIX):]}",
                          field="env.name")
    horizon = _expect(flat, "env.horizon", "int", optional=True)
    if horizon is not None and horizon < 1:
        raise ConfigError(f"must be >= 1, got {horizon}", field="env.horizon")

    eval_n = _expect(flat, "data.eval_n_trajectories", "int")
    mc_episodes = _expect(flat, "evaluate.mc_episodes", "int")
    for key, value in (("data.eval_n_trajectories", eval_n),
                       ("evaluate.mc_episodes", mc_episodes)):
        if value < 1:
            raise ConfigError(f"must be >= 1, got {value}", field=key)

    return RunConfig(
        seed=seed,
        env=env,
        horizon=horizon,
        output_dir=Path(_expect(flat, "output_dir", "str")),
        train=train,
        dataset=_existing_path(flat, "data.dataset"),
        eval_dataset=_existing_path(flat, "data.eval_dataset"),
        eval_n_trajectories=eval_n,
        eval_seed_offset=_expect(flat, "evaluate.eval_seed_offset", "int"),
        simulator=_expect(flat, "evaluate.simulator", "bool"),
        mc_episodes=mc_episodes,
        values=values,
    )


# ─────────────────────────────────────────────
# Run directories
# ─────────────────────────────────────────────

def run_directory(output_dir: str | Path, command: str, checksum: str) -> Path:
    """``<output_dir>/<command>-<sha12>``, suffixed -1, -2, ... if taken."""
    base = Path(output_dir) / f"{command}-{checksum.split(':', 1)[-1][:12]}"
    candidate, n = base, 0
    while candidate.exists():
        n += 1
        candidate = base.with_name(f"{base.name}-{n}")
    return candidate


def create_run_directory(config: RunConfig, command: str,
                         inputs: dict[str, Path] | None = None) -> Path:
    """Create a fresh run directory and write its run.lock."""
    run_dir = run_directory(config.output_dir, command, config.checksum)
    run_dir.mkdir(parents=True)
    write_lock(config.run_lock(command, inputs), run_dir / LOCK_NAME)
    logger.info("Run directory: %s", run_dir)
    return run_dir


def defaults_help() -> str:
    """Every configuration field with its default, one per line."""
    lines = []
    for key, value in flatten_values(load_defaults()).items():
        shown = "(required)" if key == "seed" else ("null" if value is None else value)
        lines.append(f"  {key} = {shown}")
    return "\n".join(lines)
