"""
Configuration loading
YAML file deep-merged onto built-in defaults, then environment overrides
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

REPO_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_CONFIG_PATH = REPO_ROOT / "config" / "bwvi_config.yaml"

DEFAULTS: Dict[str, Any] = {
    "system": {
        "log_level": "INFO",
        "output_root": "./artifacts",
    },
    "numerics": {
        "divergence_threshold": 1e12,
    },
    "estimators": {
        "adaptive_clamp": [0.05, 1.0],
    },
    "optimizers": {
        "eta": 1.0,
        "steps": 300,
        "record_every": 1,
        "init": "standard",
    },
    "diagnostics": {
        "objective_samples": 256,
        "variance_draws": 5000,
    },
    "harness": {
        "seeds": 10,
        "master_seed": 20240501,
        "threads": None,
        "record_timing": True,
        "presets_dir": str(REPO_ROOT / "presets"),
        "run_log": {"enabled": True, "max_events_memory": 1000},
    },
    "targets": {
        "scale": 10.0,
        "floor": 20.0,
    },
}


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into a copy of base"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _resolve_presets_dir(config: Dict[str, Any]):
    # relative preset directories are anchored at the repository root
    presets_dir = Path(config["harness"]["presets_dir"]).expanduser()
    if not presets_dir.is_absolute():
        presets_dir = (REPO_ROOT / presets_dir).resolve()
    config["harness"]["presets_dir"] = str(presets_dir)


def load_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load configuration

    Args:
        path: YAML file; BWVI_CONFIG or config/bwvi_config.yaml when omitted

    Returns:
        Configuration dict with every default section present
    """
    source = path or os.environ.get("BWVI_CONFIG") or DEFAULT_CONFIG_PATH
    source = Path(source).expanduser()

    loaded: Dict[str, Any] = {}
    if source.exists():
        with open(source, "r") as f:
            loaded = yaml.safe_load(f) or {}
        logger.debug(f"Loaded configuration from {source}")
    elif path is not None:
        raise FileNotFoundError(f"Configuration file not found: {source}")
    else:
        logger.debug(f"No configuration file at {source}, using defaults")

    config = deep_merge(DEFAULTS, loaded)
    _resolve_presets_dir(config)

    threads = os.environ.get("BWVI_THREADS")
    if threads:
        try:
            config["harness"]["threads"] = max(1, int(threads))
        except ValueError:
            logger.warning(f"Ignoring non-integer BWVI_THREADS={threads!r}")

    level = os.environ.get("BWVI_LOG_LEVEL")
    if level:
        config["system"]["log_level"] = level.upper()

    return config


def thread_cap(config: Dict[str, Any]) -> int:
    """Replica parallelism: configured cap, else machine cores"""
    threads = config.get("harness", {}).get("threads")
    return int(threads) if threads else (os.cpu_count() or 1)
