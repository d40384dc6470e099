"""Cached process settings with test overrides"""

from functools import lru_cache
from typing import Optional

from .config import HomingSettings

# Global instances
_settings: Optional[HomingSettings] = None


@lru_cache()
def get_settings() -> HomingSettings:
    """Get cached settings instance

    Loads from environment variables and .env file.
    Uses lru_cache to ensure singleton.
    """
    global _settings
    if _settings is None:
        _settings = HomingSettings()
    return _settings


def set_custom_settings(settings: HomingSettings) -> None:
    """Override settings with custom instance

    Args:
        settings: Custom settings instance
    """
    global _settings
    _settings = settings
    get_settings.cache_clear()


def reset_dependencies() -> None:
    """Reset all cached dependencies (for testing)"""
    global _settings
    _settings = None
    get_settings.cache_clear()
