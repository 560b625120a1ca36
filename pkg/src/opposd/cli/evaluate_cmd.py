"""
opposd.cli.evaluate_cmd — opposd evaluate command.

Evaluates every checkpoint of a training run with the ratio-based OPPE
estimator on an evaluation dataset disjoint from the training data:

  opposd evaluate runs/train-1a2b3c4d5e6f
  opposd evaluate RUN --set data.eval_dataset=eval.jsonl
  opposd evaluate RUN --set evaluate.simulator=false   — OPPE only

The training run's configuration is the base; -f / --set apply on top.
Writes evaluations.csv (and scatter.csv) into a new run directory and
prints the selected checkpoint id on stdout.
"""

from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from opposd.cli.common import handle_errors
from opposd.config.lock import parse_lock
from opposd.config.run import apply_env_overrides, build_run_config, create_run_directory
from opposd.config.values import merge_all_values
from opposd.data.io import load_dataset
from opposd.oppe.evaluate import evaluate_checkpoints
from opposd.train.loop import prepare_dataset


@click.command("evaluate")
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("-f", "--values", "value_files", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Config file applied on top of the training run's config")
@click.option("--set", "set_args", multiple=True,
              help="Config override (dotted.key=value)")
def evaluate_cmd(run_dir, value_files, set_args):
    """Estimate every checkpoint's return off-policy and select the best."""
    run_dir = Path(run_dir)
    with handle_errors():
        lock = parse_lock(run_dir)
        values = merge_all_values(lock.config, list(value_files), list(set_args))
        config = build_run_config(apply_env_overrides(values))

        if config.eval_dataset is not None:
            dataset = load_dataset(config.eval_dataset)
            inputs = {"eval_dataset": config.eval_dataset}
        else:
            eval_train = _with_trajectories(config)
            rng = np.random.default_rng(config.seed + config.eval_seed_offset)
            dataset = prepare_dataset(config.make_env(), eval_train, rng)
            inputs = {}

        env = config.make_env() if config.simulator else None
        out_dir = create_run_directory(config, "evaluate", inputs)
        summary = evaluate_checkpoints(
            run_dir / "checkpoints", dataset, config.train, out_dir,
            env=env, mc_episodes=config.mc_episodes,
        )

    click.echo(f"Evaluated {len(summary.records)} checkpoints -> {summary.evaluations_path}",
               err=True)
    if summary.pearson_r is not None:
        click.echo(f"Pearson r (OPPE vs Monte-Carlo): {summary.pearson_r:.4f}", err=True)
    click.echo(summary.best.checkpoint_id)


def _with_trajectories(config):
    return replace(config.train, n_trajectories=config.eval_n_trajectories)
