"""
opposd.cli.select_cmd — opposd select command.

  opposd select runs/evaluate-0a1b2c3d4e5f/evaluations.csv

Prints the checkpoint id with the highest OPPE estimate (ties: the later
checkpoint).
"""

import click

from opposd.cli.common import handle_errors
from opposd.oppe.selection import read_evaluations, select_best


@click.command("select")
@click.argument("evaluations", type=click.Path(exists=True, dir_okay=False))
def select_cmd(evaluations):
    """Select the checkpoint with the best OPPE estimate."""
    with handle_errors():
        records, pearson = read_evaluations(evaluations)
        best = select_best(records)

    click.echo(f"{len(records)} records; best OPPE estimate {best.oppe_estimate:.4f}", err=True)
    if pearson is not None:
        click.echo(f"Pearson r (OPPE vs Monte-Carlo): {pearson:.4f}", err=True)
    click.echo(best.checkpoint_id)
