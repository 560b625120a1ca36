"""
opposd.cli.common — Options and error handling shared by the commands.

Exit codes:
    0  success
    1  any other opposd error (missing checkpoints, lock drift, ...)
    2  configuration error
    3  numeric failure (non-finite values, failed invariant checks)
"""

from __future__ import annotations

import sys
from contextlib import contextmanager
from typing import Iterator

import click

from opposd.config.run import RunConfig, load_run_config
from opposd.errors import ConfigError, NumericError, OpposdError

EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def exit_code_for(error: BaseException) -> int:
    """Walk the cause chain: a wrapped ConfigError/NumericError decides the code."""
    seen: BaseException | None = error
    while seen is not None:
        if isinstance(seen, ConfigError):
            return EXIT_CONFIG
        if isinstance(seen, NumericError):
            return EXIT_NUMERIC
        seen = seen.__cause__
    return EXIT_ERROR


@contextmanager
def handle_errors() -> Iterator[None]:
    try:
        yield
    except OpposdError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(exit_code_for(e))


def config_options(fn):
    """-f / --set / --preset, the run configuration sources."""
    fn = click.option("--preset", "presets", multiple=True,
                      help="Preset overlay (default: $OPPOSD_PRESET)")(fn)
    fn = click.option("--set", "set_args", multiple=True,
                      help="Config override (dotted.key=value)")(fn)
    fn = click.option("-f", "--values", "value_files", multiple=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="Config file (multiple allowed, later wins)")(fn)
    return fn


def load_config(presets, value_files, set_args) -> RunConfig:
    return load_run_config(list(presets), list(value_files), list(set_args))
