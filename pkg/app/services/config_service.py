"""Run configuration loading: JSON files, presets and validation."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ValidationError

from app.core.exceptions import ConfigurationError
from app.core.presets import deep_merge, get_preset
from app.schemas.config import RunConfig

logger = logging.getLogger(__name__)


def _error_key(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "config"


def filled_defaults(model: BaseModel, prefix: str = "") -> List[str]:
    """Dotted names of every field that took its default value."""
    filled = []
    for name in type(model).model_fields:
        dotted = f"{prefix}{name}"
        value = getattr(model, name)
        if name not in model.model_fields_set:
            filled.append(dotted)
        elif isinstance(value, BaseModel):
            filled.extend(filled_defaults(value, f"{dotted}."))
    return filled


def build_config(raw: Dict[str, Any], source: str = "config") -> RunConfig:
    """Validate a raw mapping, expanding an optional ``preset`` key first.

    Args:
        raw: Parsed configuration mapping
        source: Label used in log and error messages

    Returns:
        RunConfig: Validated configuration

    Raises:
        ConfigurationError: If a key is missing or invalid, naming the key
    """
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{source}: top level must be a mapping", key="config")
    raw = dict(raw)
    preset = raw.pop("preset", None)
    if preset is not None:
        raw = deep_merge(get_preset(str(preset)), raw)
        logger.info(f"{source}: expanded preset '{preset}'")

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        key = _error_key(first)
        raise ConfigurationError(f"{source}: invalid '{key}': {first.get('msg', 'invalid value')}", key=key) from e

    defaults = filled_defaults(config)
    if defaults:
        logger.info(f"{source}: defaults filled for {', '.join(defaults)}")
    return config


def parse_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run configuration.

    Raises:
        ConfigurationError: If the file is unreadable, not JSON or invalid
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigurationError(f"config file {path} not found", key="config") from e
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}", key="config") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path} is not valid JSON: {e}", key="config") from e
    return build_config(raw, source=str(path))


def config_from_preset(name: str, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Validated configuration of a built-in preset with optional overrides."""
    raw: Dict[str, Any] = {"preset": name}
    if overrides:
        raw.update(overrides)
    return build_config(raw, source=f"preset {name}")
