"""
YAML configuration of the experiment harness.

profiles.yaml holds desk-scale schedule overrides and named sweeps;
golden.yaml holds the frozen tolerance windows.
"""

from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from console import get_logger
from errors import InvalidArgument
from learner.schedule import ScheduleOverrides

logger = get_logger("experiments.config")

CONFIG_DIR = Path(__file__).parent
PROFILES_PATH = CONFIG_DIR / "profiles.yaml"
GOLDEN_PATH = CONFIG_DIR / "golden.yaml"


def read_yaml(path: Path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise InvalidArgument(f"{path}: top level must be a mapping")
    return data


@lru_cache(maxsize=None)
def _profiles_file(path: str) -> Dict[str, Any]:
    return read_yaml(Path(path))


@lru_cache(maxsize=None)
def _golden_file(path: str) -> Dict[str, Any]:
    return read_yaml(Path(path))


def golden(section: str, path: Path = GOLDEN_PATH) -> Dict[str, Any]:
    """One section of golden.yaml."""
    data = _golden_file(str(path))
    if section not in data:
        raise InvalidArgument(f"golden file has no section '{section}'")
    return data[section]


def profile_names(path: Path = PROFILES_PATH) -> list:
    return sorted(_profiles_file(str(path)).get("profiles", {}))


def profile_overrides(profile: Optional[str], system_name: str, path: Path = PROFILES_PATH) -> ScheduleOverrides:
    """
    Overrides of `profile` for `system_name`.

    A profile without an entry for the system yields no overrides (the
    theoretical schedule) and a warning.
    """
    if not profile:
        return ScheduleOverrides()
    profiles = _profiles_file(str(path)).get("profiles", {})
    if profile not in profiles:
        raise InvalidArgument(f"unknown profile '{profile}', choose from {', '.join(sorted(profiles))}")
    entry = (profiles[profile] or {}).get(system_name)
    if entry is None:
        if profiles[profile]:
            logger.warning("profile '%s' has no entry for system '%s'; using the theoretical schedule",
                           profile, system_name)
        return ScheduleOverrides()
    return ScheduleOverrides.from_dict(entry)


def named_sweep(name: str, path: Path = PROFILES_PATH) -> Dict[str, Any]:
    sweeps = _profiles_file(str(path)).get("sweeps", {})
    if name not in sweeps:
        raise InvalidArgument(f"unknown sweep '{name}', choose from {', '.join(sorted(sweeps))}")
    return dict(sweeps[name])
