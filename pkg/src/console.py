"""
Console output and logging for LQR-PG.

Status lines use colorama like the rest of the tooling; library modules log
through the `lqrpg` logger namespace and never print.
"""

import logging
import sys
from typing import Optional

from colorama import Fore, Style, init

import settings

# Initialize colorama for Windows terminals
init()

ROOT_LOGGER = "lqrpg"

_LEVEL_COLORS = {
    logging.DEBUG: Fore.BLUE,
    logging.INFO: Fore.CYAN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}


class ColoredFormatter(logging.Formatter):
    """Prefix each record with a coloured level tag."""

    def format(self, record: logging.LogRecord) -> str:
        color = _LEVEL_COLORS.get(record.levelno, "")
        tag = f"{color}[{record.levelname.lower()}]{Style.RESET_ALL}"
        return f"{tag} {record.name}: {record.getMessage()}"


def get_logger(name: str) -> logging.Logger:
    """Logger under the package namespace, e.g. get_logger("lqr.analytics")."""
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def configure_logging(verbosity: Optional[int] = None) -> logging.Logger:
    """
    Install a single coloured stderr handler on the package logger.

    Args:
        verbosity: 0 = environment default, 1 = INFO, 2+ = DEBUG

    Returns:
        The configured root package logger
    """
    if verbosity is None or verbosity <= 0:
        level = settings.log_level()
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.DEBUG

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level)

    if not any(getattr(h, "_lqrpg", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(ColoredFormatter())
        handler._lqrpg = True
        logger.addHandler(handler)

    return logger


def banner(title: str, color: str = Fore.CYAN) -> None:
    """Print a framed section title."""
    print(f"\n{color}{'=' * 60}{Style.RESET_ALL}")
    print(f"{Fore.GREEN}  {title}{Style.RESET_ALL}")
    print(f"{color}{'=' * 60}{Style.RESET_ALL}\n")


def field(name: str, value) -> None:
    """Print one `name: value` summary line (fixed order is the caller's job)."""
    print(f"{Fore.YELLOW}{name}:{Style.RESET_ALL} {value}")


def success(message: str) -> None:
    print(f"{Fore.GREEN}✓ {message}{Style.RESET_ALL}")


def failure(message: str) -> None:
    print(f"{Fore.RED}✗ {message}{Style.RESET_ALL}")


def warn(message: str) -> None:
    print(f"{Fore.YELLOW}⚠ {message}{Style.RESET_ALL}")
