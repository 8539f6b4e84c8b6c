import csv
import functools
import io
import json
import sys
from pathlib import Path
from typing import Callable, Optional

import click
from pydantic import ValidationError

from .config import settings
from .errors import InvalidInputError, NumericalError
from .experiment import get_preset, run_preset, sweep
from .logger import logger, set_verbosity
from .schemas import RunConfig, SweepConfig, SweepReport
from .tomography import mle_reconstruct
from .utils import GENERATOR, parse_grid, read_counts_csv, write_counts_csv

EXIT_INVALID = 2
EXIT_NUMERICAL = 3

SWEEP_COLUMNS = ("value", "witness", "stderr", "success_probability", "concurrence")


def handle_errors(command: Callable) -> Callable:
    """Map input problems to exit code 2 and numerical failures to 3"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (InvalidInputError, ValidationError, OSError, json.JSONDecodeError) as e:
            logger.error(f"{command.__name__}: {e}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_INVALID)
        except NumericalError as e:
            logger.error(f"{command.__name__}: numerical failure: {e}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_NUMERICAL)

    return wrapper


def _emit(text: str, out: Optional[str], default_name: str) -> None:
    if out == "-":
        click.echo(text, nl=False)
        return
    path = Path(out) if out else Path(settings.SWAPCHAIN_OUTPUT_DIR) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info("Wrote %s", path)


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path}: config must be a JSON object")
    return data


@click.group()
@click.version_option(settings.VERSION, prog_name=settings.APP_NAME)
@click.option("-v", "--verbose", count=True, help="More log output (repeatable).")
@click.option("-q", "--quiet", count=True, help="Less log output (repeatable).")
def cli(verbose: int, quiet: int) -> None:
    """Multistage entanglement swapping simulator"""
    set_verbosity(settings.LOG_LEVEL)
    if verbose or quiet:
        set_verbosity(delta=verbose - quiet)


@cli.command()
@click.option("--preset", default=None, help="Preset name (default: ideal).")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="RunConfig JSON file.")
@click.option("--seed", type=int, default=None)
@click.option("--events-per-setting", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.option("--analytic/--sampled", default=None,
              help="Exact probabilities instead of sampled counts.")
@click.option("--bootstrap", type=int, default=None, help="Bootstrap resamples for tomography.")
@click.option("--out", default=None, help="Output file, '-' for stdout.")
@handle_errors
def run(preset, config_path, seed, events_per_setting, fmt, analytic, bootstrap, out) -> None:
    """Run a preset and write its report"""
    data = _load_config(config_path)
    overrides = {
        "preset": preset,
        "seed": seed,
        "events_per_setting": events_per_setting,
        "format": fmt,
        "analytic": analytic,
        "bootstrap": bootstrap,
        "out": out,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    config = RunConfig.model_validate(data)
    if config.verbosity:
        set_verbosity(config.verbosity)

    logger.info("Command run: preset %s", config.preset)
    report = run_preset(config.preset, config)
    if config.format == "csv":
        buffer = io.StringIO()
        write_counts_csv(report.counts, buffer)
        text = buffer.getvalue()
    else:
        text = report.model_dump_json(indent=2) + "\n"
    _emit(text, config.out, f"{config.preset}-{report.seed}.{config.format}")


@cli.command(name="sweep")
@click.argument("parameter")
@click.argument("grid")
@click.option("--preset", default="ideal", show_default=True, help="Base preset.")
@click.option("--analytic/--sampled", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv",
              show_default=True)
@click.option("--out", default=None, help="Output file, '-' for stdout.")
@handle_errors
def sweep_command(parameter, grid, preset, analytic, seed, fmt, out) -> None:
    """Sweep PARAMETER over GRID ("start:stop[:step]" or "a,b,c")"""
    config = SweepConfig(
        parameter=parameter, grid=parse_grid(grid), preset=preset, analytic=analytic, seed=seed
    )
    logger.info("Command sweep: %s over %d points", config.parameter, len(config.grid))
    base_seed = get_preset(config.preset).seed if config.seed is None else config.seed
    rows = sweep(
        config.parameter, config.grid, config.preset, analytic=config.analytic, seed=base_seed
    )
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([repr(getattr(row, column)) for column in SWEEP_COLUMNS])
        text = buffer.getvalue()
    else:
        report = SweepReport(config=config, generator=GENERATOR, seed=base_seed, rows=rows)
        text = report.model_dump_json(indent=2) + "\n"
    _emit(text, out, f"sweep-{config.parameter}-{base_seed}.{fmt}")


@cli.command()
@click.option("--preset", default=None, help="Simulate counts with this preset.")
@click.option("--counts", "counts_path", type=click.Path(dir_okay=False), default=None,
              help="Counts CSV with header setting,outcome,count.")
@click.option("--seed", type=int, default=None)
@click.option("--bootstrap", type=int, default=None, help="Bootstrap resamples.")
@click.option("--out", default=None, help="Output file, '-' for stdout.")
@handle_errors
def tomo(preset, counts_path, seed, bootstrap, out) -> None:
    """Reconstruct the photon (1, 2n) state from nine-setting counts"""
    if (preset is None) == (counts_path is None):
        raise InvalidInputError("Give exactly one of --preset or --counts")
    if bootstrap is not None and bootstrap < 0:
        raise InvalidInputError(f"--bootstrap must be non-negative, got {bootstrap}")

    if counts_path is not None:
        logger.info("Command tomo: counts file %s", counts_path)
        seed = settings.DEFAULT_SEED if seed is None else seed
        result = mle_reconstruct(read_counts_csv(counts_path), resamples=bootstrap, seed=seed)
        name = Path(counts_path).stem
    else:
        logger.info("Command tomo: preset %s", preset)
        config = RunConfig(preset=preset, seed=seed, tomography=True, bootstrap=bootstrap)
        report = run_preset(preset, config)
        result = report.tomography
        seed = report.seed
        name = preset
    _emit(result.model_dump_json(indent=2) + "\n", out, f"tomo-{name}-{seed}.json")


if __name__ == "__main__":
    cli()
