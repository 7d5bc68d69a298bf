import copy
import logging
import os
from typing import Any, Dict, Optional

import munch
import yaml  # type: ignore

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "RESTRICTION_THREADS"

DEFAULT_CONFIG: Dict[str, Any] = {
    "log_level": "WARNING",
    "log_file": None,
    "threads": None,
    "numerics": {
        "high_precision_dps": 60,
    },
    "asympt": {
        "default_grid": [-0.2, -0.15, -0.1, -0.07, -0.05],
        "extended_grid": [-0.1, -0.07, -0.05, -0.035, -0.025, -0.02],
    },
    "mc": {
        "launch_offset": 0.1,
        "target_arc": 0.1,
        "chunk_size": 4096,
        "max_steps": 10**8,
        "min_accepted": 100,
    },
}


def read_config(filepath):
    config = yaml.safe_load(open(filepath))
    config = munch.munchify(config)
    return config


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(filepath: Optional[str] = None) -> munch.Munch:
    """Built-in defaults, overlaid with the YAML file at filepath if one is given."""
    if filepath is None:
        return munch.munchify(copy.deepcopy(DEFAULT_CONFIG))
    overrides = read_config(filepath) or {}
    return munch.munchify(_merge(DEFAULT_CONFIG, munch.unmunchify(overrides)))


def worker_count(config: Optional[munch.Munch] = None) -> int:
    """Workers for grid and Monte Carlo evaluation. RESTRICTION_THREADS caps everything else."""
    count = os.cpu_count() or 1
    if config is not None and config.get("threads"):
        count = int(config.threads)
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            count = min(count, int(env))
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={env!r}")
    return max(1, count)
