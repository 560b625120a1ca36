"""
opposd.cli — CLI entry point.

Commands:
  opposd collect [flags]        — Collect a behavior dataset
  opposd train [flags]          — Train OPPOSD / Off-PAC, write checkpoints + metrics
  opposd evaluate <run> [flags] — OPPE of every checkpoint, select the best
  opposd select <csv>           — Select from an existing evaluations.csv
  opposd gradcheck              — Run the invariant suite
"""

import logging

import click

from opposd.cli.collect_cmd import collect_cmd
from opposd.cli.evaluate_cmd import evaluate_cmd
from opposd.cli.gradcheck_cmd import gradcheck_cmd
from opposd.cli.select_cmd import select_cmd
from opposd.cli.train_cmd import train_cmd
from opposd.config.run import defaults_help

EPILOG = (
    "\b\nConfiguration fields and defaults (override with -f FILE, "
    "--set key=value or --preset NAME):\n" + defaults_help()
)


@click.group(epilog=EPILOG)
@click.version_option(package_name="opposd-lab")
@click.option("-v", "--verbose", count=True,
              help="-v for progress (INFO), -vv for per-update detail (DEBUG)")
def main(verbose):
    """opposd — batch off-policy policy optimization with state distribution correction."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


main.add_command(collect_cmd, "collect")
main.add_command(train_cmd, "train")
main.add_command(evaluate_cmd, "evaluate")
main.add_command(select_cmd, "select")
main.add_command(gradcheck_cmd, "gradcheck")
