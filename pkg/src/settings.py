"""
Environment configuration.

Values come from the process environment, optionally seeded from a `.env`
file in the working directory (see .env.example).
"""

import logging
import os

from dotenv import load_dotenv

load_dotenv()

THREADS_VAR = "LQRPG_THREADS"
LOG_LEVEL_VAR = "LQRPG_LOG_LEVEL"
MAX_DEFAULT_WORKERS = 8


def worker_count() -> int:
    """Number of sweep workers: LQRPG_THREADS if set, else CPU count capped at 8."""
    raw = os.getenv(THREADS_VAR)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            value = 0
        if value >= 1:
            return value
    return max(1, min(os.cpu_count() or 1, MAX_DEFAULT_WORKERS))


def log_level() -> int:
    """Default log level from LQRPG_LOG_LEVEL (WARNING if unset or unknown)."""
    name = os.getenv(LOG_LEVEL_VAR, "WARNING").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING
