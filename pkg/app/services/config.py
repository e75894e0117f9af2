"""
Configuration loading.

Precedence: explicit overrides (CLI flags) > config file > environment
(`ZKC_*`, read by app.models.config) > built-in defaults.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from app.models.config import PipelineConfig
from app.services.errors import ConfigError


logger = logging.getLogger(__name__)

INT_KEYS = {
    "bit_width", "field_modulus", "max_unroll", "cores",
    "max_push", "max_script", "rng_seed", "max_logic_inputs",
}
KNOWN_KEYS = INT_KEYS | {"strategy", "defines"}


def parse_defines(text: str) -> Dict[str, str]:
    """Parse `NAME=VALUE,FLAG` into a macro map (bare names expand to 1)."""
    defines: Dict[str, str] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, value = item.partition("=")
        defines[name.strip()] = value.strip() if value else "1"
    return defines


def read_config_file(path: Path) -> Dict[str, Any]:
    """Read a key=value config file into typed raw settings."""
    if not path.exists():
        raise ConfigError("config file not found", path=str(path))
    raw = dotenv_values(path)
    settings: Dict[str, Any] = {}
    for key, value in raw.items():
        name = key.strip().lower()
        if name not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key '{key}'", path=str(path))
        if value is None:
            continue
        if name == "defines":
            settings[name] = parse_defines(value)
        elif name in INT_KEYS:
            try:
                settings[name] = int(value, 0)
            except ValueError as exc:
                raise ConfigError(f"{key} must be an integer, got '{value}'", path=str(path)) from exc
        else:
            settings[name] = value.strip()
    return settings


def load_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    """Build a validated PipelineConfig."""
    settings: Dict[str, Any] = {}
    if path is not None:
        settings.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "defines":
            settings["defines"] = {**settings.get("defines", {}), **value}
        else:
            settings[key] = value
    try:
        cfg = PipelineConfig(**settings)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.errors()[0]['msg']}") from exc
    logger.debug("configuration: %s", cfg.model_dump())
    return cfg
