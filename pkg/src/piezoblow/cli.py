"""Command-line simulation, certification and bound evaluation."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from time import perf_counter
from typing import Annotated, Literal

from cyclopts import App, CycloptsError, Parameter
from cyclopts.help import ColumnSpec, DefaultFormatter, DescriptionRenderer, HelpEntry

from ._config import ConfigError, RunConfig, parse_config, parse_sweep_grid
from .core import certify, convergence, lower_bound, simulate, sweep
from .logger import setup_cli_logging
from .report import RunReport

CommandName = Literal["simulate", "certify", "lowerbound", "convergence", "sweep"]

EXIT_INFEASIBLE = 3


def _short_names(entry: HelpEntry) -> str:
    return " ".join(entry.positive_shorts)


def _long_names(entry: HelpEntry) -> str:
    return " ".join(entry.positive_names)


_HELP_COLUMNS = (
    ColumnSpec(
        renderer=lambda entry: "*" if entry.required else "",
        width=1,
        style="red bold",
    ),
    ColumnSpec(renderer=_short_names, width=2, style="cyan"),
    ColumnSpec(renderer=_long_names, no_wrap=True, style="cyan"),
    ColumnSpec(renderer=DescriptionRenderer(), overflow="fold"),
)


def _format_usage_error(error: CycloptsError) -> str:
    command = " ".join(("piezoblow", *(error.command_chain or ()), "--help"))
    return f"Error: {error}\nTry '{command}' for more information."


app = App(
    name="piezoblow",
    help="Simulate and certify finite-time blow-up of damped piezoelectric beams.",
    default_parameter=Parameter(negative=False),
    help_formatter=DefaultFormatter(column_specs=_HELP_COLUMNS),
    help_on_error=False,
    error_formatter=_format_usage_error,
    version_flags=(),
    result_action="return_value",
)

ConfigPath = Annotated[Path, Parameter(alias="-c")]


@Parameter(name="*")
@dataclass(frozen=True)
class CommonOptions:
    """Options shared by all commands.

    Parameters
    ----------
    out
        Output directory. Defaults to the configuration's [output] dir.
    log_file
        Path to save the log file.
    verbose
        Enable verbose debugging output.
    quiet
        Suppress output except warnings and errors.
    """

    out: Annotated[Path | None, Parameter(alias="-o")] = None
    log_file: Annotated[Path | None, Parameter(alias="-l")] = None
    verbose: Annotated[bool, Parameter(alias="-v")] = False
    quiet: Annotated[bool, Parameter(alias="-q")] = False


@app.command(name="simulate", sort_key=0)
def simulate_command(
    *,
    config: ConfigPath,
    options: CommonOptions = CommonOptions(),
) -> None:
    """Integrate the system and write the diagnostic series.

    Parameters
    ----------
    config
        Path to the run configuration.
    """
    _execute("simulate", config, options)


@app.command(name="certify", sort_key=1)
def certify_command(
    *,
    config: ConfigPath,
    options: CommonOptions = CommonOptions(),
) -> None:
    """Simulate, then select and check a blow-up certificate.

    Exits with status 3 when the initial energy is not negative or no
    certificate exists.

    Parameters
    ----------
    config
        Path to the run configuration.
    """
    _execute("certify", config, options)


@app.command(name="lowerbound", sort_key=2)
def lowerbound_command(
    *,
    config: ConfigPath,
    simulate: Annotated[bool, Parameter(alias="-s")] = False,
    options: CommonOptions = CommonOptions(),
) -> None:
    """Evaluate the lower bound on the blow-up time.

    Parameters
    ----------
    config
        Path to the run configuration.
    simulate
        Also simulate and compare the detected blow-up time with the bound.
    """
    _execute("lowerbound", config, options, with_simulation=simulate)


@app.command(name="convergence", sort_key=3)
def convergence_command(
    *,
    config: ConfigPath,
    levels: Annotated[int, Parameter(alias="-n")] = 3,
    options: CommonOptions = CommonOptions(),
) -> None:
    """Run the grid and time step refinement studies.

    Parameters
    ----------
    config
        Path to the run configuration.
    levels
        Number of refinement levels, at least 2.
    """
    _execute("convergence", config, options, levels=levels)


@app.command(name="sweep", sort_key=4)
def sweep_command(
    *,
    config: ConfigPath,
    grid: Annotated[Path, Parameter(alias="-g")],
    jobs: Annotated[int, Parameter(alias="-j")] = 1,
    options: CommonOptions = CommonOptions(),
) -> None:
    """Evaluate a grid of source and damping parameters.

    Parameters
    ----------
    config
        Path to the base run configuration.
    grid
        Path to the [sweep] grid of values.
    jobs
        Number of worker processes.
    """
    _execute("sweep", config, options, grid=grid, jobs=jobs)


def _execute(
    command: CommandName,
    config_path: Path,
    options: CommonOptions,
    *,
    with_simulation: bool = False,
    levels: int = 3,
    grid: Path | None = None,
    jobs: int = 1,
) -> None:
    logger = setup_cli_logging(
        verbose=options.verbose,
        quiet=options.quiet,
        log_file=None if options.log_file is None else str(options.log_file),
    )

    try:
        logger.info(f"Loading configuration from {config_path}...")
        config = parse_config(config_path)
        logger.debug(f"Resolved configuration: {config.echo()}")
        output_dir = options.out if options.out is not None else config.output_dir
        started = perf_counter()
        report: RunReport | None = None

        if command == "sweep":
            assert grid is not None
            sweep_grid = parse_sweep_grid(grid)
            sweep(config, sweep_grid, output_dir, jobs=jobs)
        else:
            report = _run(
                command,
                config,
                output_dir,
                with_simulation=with_simulation,
                levels=levels,
            )

        elapsed = perf_counter() - started
        logger.info(f"Completed {command} in {elapsed:.3f} seconds.")
    except KeyboardInterrupt:
        logger.warning("Operation cancelled by user.")
        raise SystemExit(130) from None
    except Exception as error:
        handle_error(error, logger, verbose=options.verbose)
        raise SystemExit(1) from None

    if report is not None and command == "certify" and not certificate_found(report):
        logger.error("No blow-up certificate exists for this configuration.")
        raise SystemExit(EXIT_INFEASIBLE)


def _run(
    command: CommandName,
    config: RunConfig,
    output_dir: Path,
    *,
    with_simulation: bool,
    levels: int,
) -> RunReport:
    if command == "simulate":
        return simulate(config, output_dir)
    if command == "certify":
        return certify(config, output_dir)
    if command == "lowerbound":
        return lower_bound(config, output_dir, simulate=with_simulation)
    return convergence(config, output_dir, levels=levels)


def certificate_found(report: RunReport) -> bool:
    """Return whether ``report`` holds a feasible certificate."""
    return (
        report.infeasible is None
        and report.certificate is not None
        and report.certificate.feasible
    )


def handle_error(
    error: Exception,
    logger: logging.Logger,
    verbose: bool = False,
) -> None:
    """Write an actionable message for a failed command."""
    if isinstance(error, FileExistsError):
        logger.error(str(error))
        logger.error("Choose another output directory and try again.")
    elif isinstance(error, FileNotFoundError):
        logger.error(f"File not found: {error.filename}")
        logger.error("Please check the file path and try again.")
    elif isinstance(error, PermissionError):
        logger.error(f"Permission denied: {error.filename}")
        logger.error("Please check file permissions and try again.")
    elif isinstance(error, ConfigError):
        logger.error(f"Invalid configuration: {error}")
    elif isinstance(error, ValueError):
        logger.error(f"Invalid input: {error}")
    elif isinstance(error, MemoryError):
        logger.error("Not enough memory to run the simulation.")
        logger.error("Try a coarser grid or a larger sample stride.")
    else:
        logger.error("An unexpected error occurred.")
        if not verbose:
            logger.error("Use -v/--verbose for more details.")

    if verbose:
        logger.debug("Error details:", exc_info=error)


def main(argv: Sequence[str] | None = None) -> None:
    app(argv)


if __name__ == "__main__":
    main()
