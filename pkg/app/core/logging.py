"""Logging configuration shared by the CLI and the results API."""
import logging
from typing import Optional

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for the process.

    Args:
        level: Level name such as "INFO" or "DEBUG"; defaults to settings.log_level
    """
    if level is None:
        from app.core.config import settings

        level = settings.log_level

    numeric_level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(level=numeric_level, format=LOG_FORMAT)
    logging.getLogger().setLevel(numeric_level)
