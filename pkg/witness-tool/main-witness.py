import logging
import os
import sys

sys.path.append('.')
sys.path.append('./witness-library/python')

import click
from dotenv import load_dotenv

from errors import ModelMismatch, SchemaError
from operations.ReproduceOperation import CASES
from WitnessForgeTool import WitnessForgeTool

# Load WITNESS_FORGE_THREADS and WITNESS_FORGE_LOG_LEVEL from the tool's .env file
load_dotenv(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".env"))

EXIT_FAILURE = 1
EXIT_INVALID_INPUT = 2


def shared_options(command):
    """
    Add the flags every subcommand accepts.

    Args:
        command: The click command function

    Returns:
        The decorated command
    """
    options = [
        click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=0, show_default=True,
                     help="Seed of every random draw."),
        click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True,
                     envvar="WITNESS_FORGE_THREADS", help="Worker threads (env WITNESS_FORGE_THREADS)."),
        click.option("--cutoff", type=click.IntRange(min=1), default=None,
                     help="Fock truncation n_max (automatic when omitted)."),
        click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Output file; bare names are written to the exported folder."),
        click.option("--format", "output_format", type=click.Choice(["json", "csv", "table"]), default=None,
                     help="Output format (default depends on the command)."),
        click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
                     default="WARNING", show_default=True, envvar="WITNESS_FORGE_LOG_LEVEL",
                     help="Library log level (env WITNESS_FORGE_LOG_LEVEL)."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def run_operation(operation_name, settings, **operation_args):
    """
    Run one operation through the WitnessForgeTool and translate errors to exit codes.

    Exit codes:
        0: success
        1: a library error, or a reproduce row that missed its target
        2: invalid input (schema violations, mismatched mode counts)
    """
    settings = dict(settings)
    logging.basicConfig(level=settings.pop("log_level").upper(), format="%(levelname)s %(name)s: %(message)s")
    tool = WitnessForgeTool(**settings)
    try:
        tool.execute_operation(operation_name, **operation_args)
    except (SchemaError, ModelMismatch) as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_INVALID_INPUT)
    except ValueError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(EXIT_FAILURE)
    if tool.state['failed']:
        click.echo("Error: at least one reproduced value missed its target", err=True)
        sys.exit(EXIT_FAILURE)


@click.group()
def cli():
    """Displaced photon-number entanglement witnesses: evaluate, solve, optimize and reproduce."""


@cli.command("eval")
@click.argument("witness_file")
@click.argument("state_file")
@click.option("--n-starts", type=click.IntRange(min=1), default=64, show_default=True)
@shared_options
def eval_command(witness_file, state_file, n_starts, **settings):
    """Evaluate WITNESS_FILE on STATE_FILE and print the report."""
    run_operation("EVAL", settings, witness_file=witness_file, state_file=state_file, n_starts=n_starts)


@cli.command("sev")
@click.argument("witness_file")
@click.option("--method", type=click.Choice(["auto", "multistart", "quintic"]), default="auto", show_default=True)
@click.option("--n-starts", type=click.IntRange(min=1), default=64, show_default=True)
@click.option("--mu", type=float, default=None, help="Also report the bound of mu * L + nu.")
@click.option("--nu", type=float, default=None)
@shared_options
def sev_command(witness_file, method, n_starts, mu, nu, **settings):
    """Solve the separability eigenvalue problem of WITNESS_FILE."""
    run_operation("SEV", settings, witness_file=witness_file, method=method, n_starts=n_starts, mu=mu, nu=nu)


@cli.command("optimize")
@click.argument("state_file")
@click.option("--partition", default=None, help="Blocks such as {1}:{2,3} (default: one block per mode).")
@click.option("--m", "m", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--config", "config_file", default=None, help="GA config JSON.")
@click.option("--initial", "initial_witness_file", default=None, help="Witness seeded into the population.")
@shared_options
def optimize_command(state_file, partition, m, config_file, initial_witness_file, **settings):
    """Search witness parameters for STATE_FILE with the genetic algorithm."""
    run_operation("OPTIMIZE", settings, state_file=state_file, partition=partition, m=m,
                  config_file=config_file, initial_witness_file=initial_witness_file)


@cli.command("sweep")
@click.argument("state_file")
@click.option("--witness", "witness_file", default=None)
@click.option("--parameter", type=click.Choice(["sigma", "xi", "kappa", "radius"]), required=True)
@click.option("--start", type=float, required=True)
@click.option("--stop", type=float, required=True)
@click.option("--points", type=click.IntRange(min=2), default=21, show_default=True)
@click.option("--critical", is_flag=True, help="Bisect the first sign change of the witness value.")
@click.option("--tol", type=float, default=1e-4, show_default=True)
@shared_options
def sweep_command(state_file, witness_file, parameter, start, stop, points, critical, tol, **settings):
    """Evaluate a witness along a parameter grid of STATE_FILE."""
    run_operation("SWEEP", settings, state_file=state_file, witness_file=witness_file, parameter=parameter,
                  start=start, stop=stop, points=points, critical=critical, tol=tol)


@cli.command("simulate")
@click.argument("witness_file")
@click.argument("state_file")
@click.option("--shots", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--etas", default=None, help="Comma-separated detection efficiencies.")
@click.option("--compensate", is_flag=True, help="Scale the displacements by sqrt(eta).")
@shared_options
def simulate_command(witness_file, state_file, shots, etas, compensate, **settings):
    """Estimate <L> of STATE_FILE by simulated displaced photon counting."""
    run_operation("SIMULATE", settings, witness_file=witness_file, state_file=state_file, shots=shots,
                  etas=etas, compensate=compensate)


@cli.command("baseline")
@click.argument("state_file", required=False)
@click.option("--criterion", type=click.Choice(["simon", "duan", "both"]), default="both", show_default=True)
@click.option("--scan", is_flag=True, help="Scan the epsilon disk of the Bell-like state instead.")
@click.option("--gamma", type=float, default=0.6, show_default=True)
@click.option("--radii", type=click.IntRange(min=1), default=11, show_default=True)
@click.option("--angles", type=click.IntRange(min=1), default=24, show_default=True)
@shared_options
def baseline_command(state_file, criterion, scan, gamma, radii, angles, **settings):
    """Simon and Duan covariance criteria for STATE_FILE."""
    run_operation("BASELINE", settings, state_file=state_file, criterion=criterion, scan=scan, gamma=gamma,
                  radii=radii, angles=angles)


@cli.command("reproduce")
@click.argument("case", type=click.Choice(list(CASES) + ["all"]))
@shared_options
def reproduce_command(case, **settings):
    """Recompute the benchmark values of CASE and compare them."""
    run_operation("REPRODUCE", settings, case=case)


if __name__ == '__main__':
    cli()
