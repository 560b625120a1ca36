"""
opposd.cli.gradcheck_cmd — opposd gradcheck command.

Runs the invariant suite and prints one row per check. Exits 3 when any
check fails.
"""

import sys

import click

from opposd.checks import run_checks
from opposd.cli.common import EXIT_NUMERIC, handle_errors


@click.command("gradcheck")
@click.option("--seed", default=0, show_default=True, type=int,
              help="Seed for the random check points")
def gradcheck_cmd(seed):
    """Run finite-difference and exact-oracle invariant checks."""
    with handle_errors():
        results = run_checks(seed)

    width = max(len(r.name) for r in results)
    click.echo(f"{'CHECK':<{width}}  {'VALUE':>11}  {'TOL':>8}  STATUS")
    for r in results:
        status = "ok" if r.passed else "FAILED"
        click.echo(f"{r.name:<{width}}  {r.value:>11.3e}  {r.tolerance:>8.1e}  {status}")

    failed = [r.name for r in results if not r.passed]
    if failed:
        click.echo(f"Error: {len(failed)} check(s) failed: {', '.join(failed)}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"All {len(results)} checks passed.", err=True)
