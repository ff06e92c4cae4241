import os
from typing import Optional

from dotenv import load_dotenv

from autoreg.errors import ConfigError

# Load environment variables
load_dotenv()

# Gull-MacKay iteration defaults
DEFAULT_ALPHA0 = 0.5
DEFAULT_ITERS = 5
DEFAULT_REL_TOL = 1e-6


def _int_env(name: str, default: Optional[int], minimum: Optional[int] = None) -> Optional[int]:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        parsed = int(value)
    except ValueError:
        raise ConfigError("Invalid environment", [f"{name}={value!r} is not an integer"])
    if minimum is not None and parsed < minimum:
        raise ConfigError("Invalid environment", [f"{name}={parsed} must be >= {minimum}"])
    return parsed


def log_level() -> str:
    return os.getenv("AUTOREG_LOG_LEVEL", "INFO").upper()


def threads() -> int:
    """Worker threads for experiments, from AUTOREG_THREADS."""
    return _int_env("AUTOREG_THREADS", 1, minimum=1)


def host() -> str:
    return os.getenv("AUTOREG_HOST", "127.0.0.1")


def port() -> int:
    return _int_env("AUTOREG_PORT", 8000, minimum=1)


def seed_override() -> Optional[int]:
    """Seed from AUTOREG_SEED, read at call time."""
    return _int_env("AUTOREG_SEED", None)
