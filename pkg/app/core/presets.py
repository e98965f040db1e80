"""Benchmark presets for the pneumatic gripper and contractor studies."""

import copy
import logging
from typing import Any, Dict, List

from app.core.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


TWO_MATERIALS = [1e7, 1e8]
THREE_MATERIALS = [1e7, 0.5e8, 1e8]

GRIPPER_PRESETS: Dict[str, Dict[str, Any]] = {
    "gripper-2mat": {
        "name": "gripper-2mat",
        "benchmark": "gripper",
        "mesh": {"nelx": 200, "nely": 100},
        "materials": {"moduli": TWO_MATERIALS},
        "volume_fractions": [0.2, 0.1],
        "projection": {"delta_eta": 0.05},
    },
    "gripper-3mat": {
        "name": "gripper-3mat",
        "benchmark": "gripper",
        "mesh": {"nelx": 200, "nely": 100},
        "materials": {"moduli": THREE_MATERIALS},
        "volume_fractions": [0.1, 0.1, 0.05],
        "projection": {"delta_eta": 0.01},
    },
}

CONTRACTOR_PRESETS: Dict[str, Dict[str, Any]] = {
    "contractor-2mat": {
        "name": "contractor-2mat",
        "benchmark": "contractor",
        "mesh": {"nelx": 100, "nely": 100},
        "materials": {"moduli": TWO_MATERIALS},
        "volume_fractions": [0.1, 0.1],
        "projection": {"delta_eta": 0.15},
    },
    "contractor-3mat": {
        "name": "contractor-3mat",
        "benchmark": "contractor",
        "mesh": {"nelx": 100, "nely": 100},
        "materials": {"moduli": THREE_MATERIALS},
        "volume_fractions": [0.1, 0.1, 0.05],
        "projection": {"delta_eta": 0.01},
    },
}

# Single- vs two-material study at desk scale
COMPARISON_PRESETS: Dict[str, Dict[str, Any]] = {
    "case-1": {
        "name": "case-1",
        "benchmark": "comparison-case",
        "mesh": {"nelx": 100, "nely": 50},
        "materials": {"moduli": [1e7]},
        "volume_fractions": [0.3],
        "projection": {"delta_eta": 0.05},
        "optimizer": {"max_iterations": 200},
    },
    "case-2": {
        "name": "case-2",
        "benchmark": "comparison-case",
        "mesh": {"nelx": 100, "nely": 50},
        "materials": {"moduli": [1e8]},
        "volume_fractions": [0.3],
        "projection": {"delta_eta": 0.05},
        "optimizer": {"max_iterations": 200},
    },
    "case-3": {
        "name": "case-3",
        "benchmark": "comparison-case",
        "mesh": {"nelx": 100, "nely": 50},
        "materials": {"moduli": TWO_MATERIALS},
        "volume_fractions": [0.15, 0.15],
        "projection": {"delta_eta": 0.05},
        "optimizer": {"max_iterations": 200},
    },
}

PRESETS: Dict[str, Dict[str, Any]] = {
    **GRIPPER_PRESETS,
    **CONTRACTOR_PRESETS,
    **COMPARISON_PRESETS,
}


def list_presets() -> List[str]:
    """Return the names of all built-in presets."""
    return sorted(PRESETS)


def get_preset(name: str) -> Dict[str, Any]:
    """Return a deep copy of a preset's raw configuration.

    Args:
        name: Preset name such as "gripper-2mat"

    Returns:
        Dict[str, Any]: Raw configuration mapping (not yet validated)

    Raises:
        ConfigurationError: If the preset is unknown
    """
    if name not in PRESETS:
        raise ConfigurationError(
            f"Unknown preset '{name}'; available: {', '.join(list_presets())}",
            key="preset",
        )
    return copy.deepcopy(PRESETS[name])


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Merge ``override`` into a copy of ``base``; nested dicts merge key by key."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged
