"""
Environment configuration utility
"""

import logging
import os
from typing import Optional

from ..models.errors import ConfigError

try:
    from dotenv import load_dotenv
    DOTENV_AVAILABLE = True
except ImportError:
    DOTENV_AVAILABLE = False

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Config:
    _env_loaded = False

    @classmethod
    def load_env(cls):
        """Load environment variables from .env file once"""
        if DOTENV_AVAILABLE and not cls._env_loaded:
            load_dotenv()
            cls._env_loaded = True

    @classmethod
    def _get(cls, name: str) -> Optional[str]:
        cls.load_env()
        value = os.getenv(name)
        if value is None or not value.strip():
            return None
        return value.strip()

    @classmethod
    def get_default_seed(cls) -> int:
        """Seed used when a command gets no explicit --seed (RELGROWTH_SEED, default 0)"""
        value = cls._get("RELGROWTH_SEED")
        if value is None:
            return 0
        try:
            seed = int(value)
        except ValueError:
            raise ConfigError(f"RELGROWTH_SEED must be an integer, got {value!r}") from None
        if seed < 0:
            raise ConfigError(f"RELGROWTH_SEED must be nonnegative, got {seed}")
        return seed

    @classmethod
    def get_log_level(cls) -> int:
        value = (cls._get("RELGROWTH_LOG_LEVEL") or "WARNING").upper()
        if value not in _LOG_LEVELS:
            raise ConfigError(f"RELGROWTH_LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}, got {value!r}")
        return getattr(logging, value)

    @classmethod
    def get_workers(cls) -> int:
        """Thread count for concurrent candidate / window fits"""
        value = cls._get("RELGROWTH_WORKERS")
        if value is None:
            return 4
        try:
            workers = int(value)
        except ValueError:
            raise ConfigError(f"RELGROWTH_WORKERS must be an integer, got {value!r}") from None
        if workers < 1:
            raise ConfigError(f"RELGROWTH_WORKERS must be at least 1, got {workers}")
        return workers
