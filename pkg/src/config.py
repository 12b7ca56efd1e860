"""
DGBO Configuration Module
Process-wide settings for the DGBO toolkit.

Settings are read from ``DGBO_*`` environment variables after an optional
``.env`` file has been loaded.
"""
import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

DEFAULT_MAX_PADDED_POINTS = 2 ** 24


class Config:
    """Configuration class for DGBO."""

    def __init__(self, env_file: Optional[str] = None):
        """
        Initialize configuration.

        Args:
            env_file: Path to .env file (optional)
        """
        self._load_env(env_file)
        self.project_root = Path(__file__).parent.parent

    def _load_env(self, env_file: Optional[str] = None) -> None:
        """Load environment variables from .env file without overriding the process environment."""
        env_path = Path(env_file) if env_file else Path.cwd() / ".env"
        if env_path.exists():
            load_dotenv(env_path, override=False)

    @property
    def debug(self) -> bool:
        """Get debug mode from environment."""
        return os.getenv("DGBO_DEBUG", "false").lower() in ("true", "1", "yes")

    @property
    def log_level(self) -> str:
        """Get log level from environment."""
        return os.getenv("DGBO_LOG_LEVEL", "INFO").upper()

    @property
    def output_dir(self) -> Optional[Path]:
        """Get the artifact directory override, if any."""
        value = os.getenv("DGBO_OUTPUT_DIR")
        return Path(value) if value else None

    @property
    def threads(self) -> Optional[int]:
        """Get the worker count override, if any."""
        value = os.getenv("DGBO_THREADS")
        return int(value) if value else None

    @property
    def seed(self) -> Optional[int]:
        """Get the random seed override, if any."""
        value = os.getenv("DGBO_SEED")
        return int(value) if value else None

    @property
    def max_padded_points(self) -> int:
        """Get the sample cap for dealiased transforms."""
        return int(os.getenv("DGBO_MAX_PADDED_POINTS", str(DEFAULT_MAX_PADDED_POINTS)))

    def __repr__(self) -> str:
        return (
            f"Config("
            f"log_level={self.log_level}, "
            f"max_padded_points={self.max_padded_points}, "
            f"debug={self.debug}"
            f")"
        )


# Global config instance
_config: Optional[Config] = None


def get_config(env_file: Optional[str] = None) -> Config:
    """
    Get or create the global configuration instance.

    Args:
        env_file: Path to .env file (optional)

    Returns:
        Config instance
    """
    global _config
    if _config is None:
        _config = Config(env_file)
    return _config


def reset_config() -> None:
    """Reset the global configuration instance."""
    global _config
    _config = None


def setup_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for command-line use."""
    logging.basicConfig(
        level=getattr(logging, (level or get_config().log_level).upper(), logging.INFO),
        format=LOG_FORMAT,
    )
