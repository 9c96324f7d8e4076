"""Configuration management utilities for the sigcurve CLI."""

import logging
import os
from pathlib import Path
from typing import Optional

import yaml

from src.config import ENV_VAR, AppConfig
from src.utils import ConfigError


logger = logging.getLogger(__name__)


def get_config_dir() -> Path:
    """Get the configuration directory path."""
    return Path.home() / ".sigcurve"


def get_config_path(config_path: Optional[str] = None) -> Path:
    """Get the configuration file path (explicit path > $SIGCURVE_CONFIG > default)."""
    if config_path:
        return Path(config_path).expanduser()
    env_path = os.environ.get(ENV_VAR)
    if env_path:
        return Path(env_path).expanduser()
    return get_config_dir() / "config.yaml"


def ensure_config_exists(config_path: Optional[str] = None) -> Path:
    """
    Ensure the config file exists, writing the defaults if it doesn't.

    Returns:
        Path to the config file
    """
    path = get_config_path(config_path)

    if path.exists():
        return path

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.dump(AppConfig.DEFAULTS, f, default_flow_style=False, sort_keys=False)

    return path


def show_config(config_path: Optional[str] = None) -> None:
    """Display the configuration file and the values actually in effect."""
    path = ensure_config_exists(config_path)

    logger.info(f"Configuration file: {path}")

    try:
        effective = AppConfig(str(path)).as_dict()
    except ConfigError as e:
        logger.error(f"Error reading config: {e}")
        return
    logger.info(yaml.dump(effective, default_flow_style=False, sort_keys=False).rstrip())


def reset_config(config_path: Optional[str] = None) -> None:
    """Reset configuration to defaults."""
    path = get_config_path(config_path)

    if path.exists():
        path.unlink()

    ensure_config_exists(config_path)

    logger.info("✓ Configuration reset to defaults")
    logger.info(f"  Location: {path}")


def validate_config(config_path: Optional[str] = None) -> bool:
    """
    Validate configuration file.

    Returns:
        True if valid, False otherwise
    """
    path = ensure_config_exists(config_path)

    try:
        AppConfig(str(path))
    except ConfigError as e:
        logger.error(str(e))
        return False

    logger.info("✓ Configuration is valid")
    return True
