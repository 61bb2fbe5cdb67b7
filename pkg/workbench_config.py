"""
Workbench Config - Centralized numeric settings for the unlocking workbench
Tolerances, finite-difference steps, search sizes and the global seed live in
workbench_config.json so runs are reproducible and tunable without code edits.
"""

import copy
import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Any, Optional

ROOT = Path(__file__).parent.resolve()
CONFIG_PATH = Path(os.getenv("WORKBENCH_CONFIG", str(ROOT / "workbench_config.json")))
CONFIG_LOCK = threading.Lock()

# Debug mode (set DEBUG_MODE=1 environment variable to enable verbose logging)
DEBUG_MODE = os.getenv("DEBUG_MODE", "0") == "1"

DEFAULT_CONFIG: Dict[str, Any] = {
    "seed": 0,
    "max_workers": 4,
    "tolerances": {
        "unit": 1e-12,
        "kissing": 1e-9,
        "line_equal": 1e-9,
        "zero_cluster": 1e-7,
        "dependence_residual": 1e-8,
        "svd": 1e-8,
        "negative_definite": 1e-8,
        "infeasible": 1e-8,
        "active_eps": 1e-6,
        "gradient_stability": 1e-4,
        "hessian_stability": 1e-3,
        "record_radius": 1e-9,
    },
    "pairwise_radius": {
        "scan_step": 0.05,
        "scan_cap": 64.0,
        "bisect_xtol": 1e-12,
    },
    "balls": {
        "t_max": 0.3,
        "steps": 256,
    },
    "gamma": {
        "phi_max": 0.8,
        "grid": 64,
        "starts": 24,
        "xtol": 1e-12,
    },
    "sweep": {
        "samples": 512,
        "golden_tol": 1e-12,
        "zero_grid": 2048,
    },
    "rigidity": {
        "gradient_step": 1e-5,
        "hessian_step": 1e-3,
        "infeasible_starts": 1000,
        "simplex_grid": 1000,
    },
    "cex": {
        "paths": 100,
        "degree": 4,
        "t_min": 1e-6,
        "t_points": 200,
    },
    "export": {
        "polygon_sides": 32,
        "half_length": 4.0,
        "icosphere_subdivisions": 3,
        "csv_digits": 12,
    },
}

# Cache the config in memory
_cached_config: Optional[Dict[str, Any]] = None
_cache_timestamp = 0.0
_seed_override: Optional[int] = None


def _merge(defaults: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(defaults)
    for key, value in loaded.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _apply_env(config: Dict[str, Any]) -> Dict[str, Any]:
    if _seed_override is not None:
        config["seed"] = _seed_override
        return config
    seed = os.getenv("WORKBENCH_SEED")
    if seed:
        try:
            config["seed"] = int(seed)
        except ValueError:
            print(f"[CONFIG WARN] Ignoring non-integer WORKBENCH_SEED={seed!r}", flush=True)
    return config


def load_config() -> Dict[str, Any]:
    """Load workbench configuration from file with caching."""
    global _cached_config, _cache_timestamp

    current_time = datetime.now(timezone.utc).timestamp()

    # Refresh cache every 5 seconds (allows hot-reloading)
    if _cached_config and (current_time - _cache_timestamp) < 5:
        return _cached_config

    with CONFIG_LOCK:
        try:
            with CONFIG_PATH.open("r", encoding="utf-8") as f:
                loaded = json.load(f)
            if DEBUG_MODE:
                print(f"[CONFIG] Loaded {CONFIG_PATH.name}", flush=True)
            config = _apply_env(_merge(DEFAULT_CONFIG, loaded))
        except FileNotFoundError:
            print(f"[CONFIG] {CONFIG_PATH.name} not found, creating default...", flush=True)
            config = _apply_env(copy.deepcopy(DEFAULT_CONFIG))
            try:
                _write(copy.deepcopy(DEFAULT_CONFIG))
            except OSError as e:
                print(f"[CONFIG WARN] Could not save default config: {e}", flush=True)
        except json.JSONDecodeError as e:
            raise ValueError(f"{CONFIG_PATH} is not valid JSON: {e}") from e
        _cached_config = config
        _cache_timestamp = current_time
        return config


def _write(config: Dict[str, Any]) -> None:
    config["last_updated"] = datetime.now(timezone.utc).isoformat()
    with CONFIG_PATH.open("w", encoding="utf-8") as f:
        json.dump(config, f, indent=2)


def save_config(config: Dict[str, Any]) -> None:
    """Save workbench configuration to file."""
    global _cached_config, _cache_timestamp

    with CONFIG_LOCK:
        _write(config)
        _cached_config = _apply_env(_merge(DEFAULT_CONFIG, config))
        _cache_timestamp = datetime.now(timezone.utc).timestamp()
        print(f"[CONFIG] Saved {CONFIG_PATH.name} (seed={config.get('seed')})", flush=True)


def get(section: str, key: Optional[str] = None) -> Any:
    """Get a config section, or a single key inside it."""
    config = load_config()
    if section not in config:
        raise ValueError(f"Unknown config section '{section}'")
    value = config[section]
    if key is None:
        return value
    if not isinstance(value, dict) or key not in value:
        raise ValueError(f"Unknown config key '{section}.{key}'")
    return value[key]


def tol(name: str) -> float:
    """Shortcut for a named tolerance."""
    return float(get("tolerances", name))


def get_seed() -> int:
    return int(load_config().get("seed", 0))


def set_seed(seed: int) -> None:
    """Override the global seed for this process (the CLI --seed flag)."""
    global _seed_override
    _seed_override = int(seed)
    load_config()["seed"] = _seed_override


def get_max_workers() -> int:
    return max(1, int(load_config().get("max_workers", 1)))


def get_status() -> str:
    """Human-readable summary of the active configuration."""
    config = load_config()
    tols = config["tolerances"]
    return (
        f"config: {CONFIG_PATH}\n"
        f"  seed: {config['seed']}  workers: {config['max_workers']}\n"
        f"  kissing tol: {tols['kissing']}  residual tol: {tols['dependence_residual']}\n"
        f"  last updated: {config.get('last_updated', 'never')}"
    )
