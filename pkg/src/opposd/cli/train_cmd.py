"""
opposd.cli.train_cmd — opposd train command.

  opposd train --set seed=0                          — collect, then train
  opposd train --set seed=0 --set data.dataset=d.jsonl
  opposd train --set seed=0 --set train.algorithm=offpac
  opposd train --resume runs/train-1a2b3c4d5e6f       — continue a run
  opposd train --resume RUN --force                  — even if inputs drifted

Prints the run directory on stdout.
"""

import sys
from pathlib import Path

import click

from opposd.cli.common import EXIT_ERROR, config_options, handle_errors, load_config
from opposd.config.lock import check_drift, parse_lock
from opposd.config.run import RunConfig, build_run_config, create_run_directory
from opposd.data.io import load_dataset
from opposd.train.checkpoint import CheckpointStore
from opposd.train.loop import train


@click.command("train")
@config_options
@click.option("--resume", "resume_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Resume the run in this directory from its latest checkpoint")
@click.option("--force", is_flag=True, default=False,
              help="Resume even if the inputs changed since the run started")
def train_cmd(value_files, set_args, presets, resume_dir, force):
    """Train OPPOSD (or the Off-PAC baseline) on a batch dataset."""
    with handle_errors():
        if resume_dir is not None:
            if value_files or set_args or presets:
                click.echo("Warning: config options are ignored with --resume; "
                           "the run's run.lock is used.", err=True)
            run_dir, config, record = _prepare_resume(Path(resume_dir), force)
        else:
            config = load_config(presets, value_files, set_args)
            inputs = {"dataset": config.dataset} if config.dataset else None
            run_dir, record = create_run_directory(config, "train", inputs), None

        source = load_dataset(config.dataset) if config.dataset else config.make_env()
        eval_env = config.make_env() if config.simulator else None
        result = train(source, config.train, run_dir, eval_env=eval_env, resume=record)

    n_ckpt = len(result.store.records())
    click.echo(
        f"Trained {config.train.algorithm} for {result.final_update} actor updates "
        f"({n_ckpt} checkpoints)",
        err=True,
    )
    click.echo(str(run_dir))


def _prepare_resume(run_dir: Path, force: bool):
    lock = parse_lock(run_dir)
    if lock.command != "train":
        click.echo(f"Error: {run_dir} is a '{lock.command}' run, not a training run.", err=True)
        sys.exit(EXIT_ERROR)

    drifted = check_drift(lock)
    if drifted:
        names = ", ".join(drifted)
        if not force:
            click.echo(
                f"Error: inputs changed since the run started ({names}). "
                f"Use --force to resume anyway.",
                err=True,
            )
            sys.exit(EXIT_ERROR)
        click.echo(f"⚠ Drift detected ({names}); resuming because of --force.", err=True)

    config: RunConfig = build_run_config(lock.config)
    record = CheckpointStore(run_dir / "checkpoints").latest()
    if record is None:
        click.echo(f"Error: No checkpoints found in {run_dir / 'checkpoints'}", err=True)
        sys.exit(EXIT_ERROR)
    return run_dir, config, record
