"""Simple logging setup for ratreg."""

import os
import sys
from typing import Any

_TRUTHY = ("true", "1", "yes")


def debug_enabled() -> bool:
    """Return True when RATREG_DEBUG asks for verbose output."""
    return os.environ.get("RATREG_DEBUG", "").lower() in _TRUTHY


def setup_debug_logging() -> bool:
    """Enable debug logging when RATREG_DEBUG is set."""
    if debug_enabled():
        sys.stderr.write("[RATREG] Debug mode enabled\n")
        return True
    return False


def debug_log(message: str, **kwargs: Any) -> None:
    """Print debug message if debug mode is enabled."""
    if debug_enabled():
        sys.stderr.write(f"[DEBUG] {message}\n")
        for key, value in kwargs.items():
            sys.stderr.write(f"  {key}: {value}\n")
