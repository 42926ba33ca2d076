"""Logging for attractor-lab: a console stream plus a DEBUG log file."""

import logging
import sys
from pathlib import Path
from typing import Optional

LOGGER_NAME = "attractor_lab"
DEFAULT_LOG_FILE = Path.home() / ".attractor_lab" / "attractor_lab.log"

CONSOLE_FORMAT = "%(levelname)s: %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _file_handler(path: Path) -> logging.Handler:
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    return handler


def setup_logging(
    log_file: Optional[Path] = None,
    level: int = logging.INFO,
    verbose: bool = False,
) -> logging.Logger:
    """
    Configure the package logger; calling it again replaces the handlers.

    Args:
        log_file: Log file path (default: ~/.attractor_lab/attractor_lab.log)
        level: Console level when not verbose
        verbose: Show DEBUG messages (bisection counts, step sizes) on the console

    Returns:
        The ``attractor_lab`` logger
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.DEBUG if verbose else level)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    logger.addHandler(console)

    path = log_file or DEFAULT_LOG_FILE
    try:
        logger.addHandler(_file_handler(path))
    except OSError as e:
        logger.warning(f"File logging disabled, cannot open {path}: {e}")
    return logger


def get_logger(name: str = LOGGER_NAME) -> logging.Logger:
    """
    Logger for ``name`` (usually ``__name__``).

    Names outside the package are nested under ``attractor_lab`` so they
    share its handlers.
    """
    if name != LOGGER_NAME and not name.startswith(LOGGER_NAME + "."):
        name = f"{LOGGER_NAME}.{name}"
    return logging.getLogger(name)
