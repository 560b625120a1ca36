from opposd.config.values import (
    deep_merge,
    flatten_values,
    load_defaults,
    load_values_file,
    merge_all_values,
    parse_set_values,
)
from opposd.config.presets import PRESET_ENV, list_presets, load_preset, resolve_presets
from opposd.config.lock import RunLock, RunLockError, check_drift, parse_lock, write_lock
from opposd.config.run import (
    OUTPUT_DIR_ENV,
    apply_env_overrides,
    RunConfig,
    build_run_config,
    create_run_directory,
    defaults_help,
    load_run_config,
    resolve_values,
    run_directory,
)

__all__ = [
    "deep_merge", "flatten_values", "load_defaults", "load_values_file",
    "merge_all_values", "parse_set_values",
    "PRESET_ENV", "list_presets", "load_preset", "resolve_presets",
    "RunLock", "RunLockError", "check_drift", "parse_lock", "write_lock",
    "OUTPUT_DIR_ENV", "apply_env_overrides", "RunConfig", "build_run_config", "create_run_directory",
    "defaults_help", "load_run_config", "resolve_values", "run_directory",
]
