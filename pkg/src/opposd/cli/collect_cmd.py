"""
opposd.cli.collect_cmd — opposd collect command.

Collects a behavior dataset into a fresh run directory:

  opposd collect --set seed=0                       — CartPole, 500 x 200 steps
  opposd collect --preset hard_example --set seed=3
  opposd collect --set seed=0 --set data.epsilon_smoothing=0.05 \\
                 --set env.name=tabular:mdp.json

Prints the dataset path on stdout.
"""

import click
import numpy as np

from opposd.cli.common import config_options, handle_errors, load_config
from opposd.config.run import create_run_directory
from opposd.data.io import save_dataset
from opposd.train.loop import prepare_dataset


@click.command("collect")
@config_options
def collect_cmd(value_files, set_args, presets):
    """Collect a behavior-policy dataset."""
    with handle_errors():
        config = load_config(presets, value_files, set_args)
        env = config.make_env()
        dataset = prepare_dataset(env, config.train, np.random.default_rng(config.seed))
        run_dir = create_run_directory(config, "collect")
        path = run_dir / "dataset.jsonl"
        save_dataset(dataset, path)

    click.echo(
        f"Collected {dataset.n_trajectories} trajectories x {dataset.horizon} steps "
        f"from {config.env}",
        err=True,
    )
    click.echo(str(path))
