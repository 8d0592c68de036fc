"""
Logging configuration for the piezoblow command line and sweep workers.
"""

import copy
import logging
import sys
from collections.abc import Iterable

PACKAGE_LOGGER = "piezoblow"

CONSOLE_FORMAT = "%(message)s"
VERBOSE_FORMAT = "%(levelname)s: %(name)s: %(message)s"
WORKER_FORMAT = "%(processName)s: %(message)s"
FILE_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
FILE_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class ColoredFormatter(logging.Formatter):
    """Color level names on terminals."""

    COLORS = {
        logging.DEBUG: "\033[94m",
        logging.INFO: "\033[92m",
        logging.WARNING: "\033[93m",
        logging.ERROR: "\033[91m",
        logging.CRITICAL: "\033[95m",
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        if sys.stderr.isatty():
            record = copy.copy(record)
            color = self.COLORS.get(record.levelno, "")
            record.levelname = f"{color}{record.levelname}{self.RESET}"
        return super().format(record)


def _install(handlers: Iterable[logging.Handler]) -> logging.Logger:
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()
    for handler in handlers:
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False
    return logger


def console_level() -> int:
    """Return the level of the package's stderr handler, or WARNING without one."""
    levels = [
        handler.level
        for handler in logging.getLogger(PACKAGE_LOGGER).handlers
        if isinstance(handler, logging.StreamHandler)
        and not isinstance(handler, logging.FileHandler)
    ]
    return min(levels, default=logging.WARNING)


def setup_cli_logging(
    verbose: bool = False,
    quiet: bool = False,
    log_file: str | None = None,
    color: bool = True,
) -> logging.Logger:
    """Configure the package logger for CLI usage.

    Library modules log through children of this logger, so one setup covers
    the pipelines and the integrator. Repeated calls replace the handlers.

    Args:
        verbose: Enable debug-level logging
        quiet: Only show warnings and errors
        log_file: Optional file receiving every record with timestamps
        color: Color level names when stderr is a terminal
    """
    if quiet:
        level = logging.WARNING
    elif verbose:
        level = logging.DEBUG
    else:
        level = logging.INFO

    console_format = VERBOSE_FORMAT if verbose else CONSOLE_FORMAT
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(
        ColoredFormatter(console_format)
        if color and sys.stderr.isatty()
        else logging.Formatter(console_format)
    )
    console.setLevel(level)
    handlers: list[logging.Handler] = [console]

    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(
            logging.Formatter(FILE_FORMAT, datefmt=FILE_DATE_FORMAT)
        )
        file_handler.setLevel(logging.DEBUG)
        handlers.append(file_handler)

    return _install(handlers)


def configure_worker_logging(level: int) -> logging.Logger:
    """Send a sweep worker's records to stderr, tagged with the process name.

    Used as the process-pool initializer; handlers inherited from the parent,
    including any log file, are closed first.
    """
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter(WORKER_FORMAT))
    console.setLevel(level)
    return _install([console])
