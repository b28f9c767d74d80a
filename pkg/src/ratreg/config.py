"""Environment-driven settings for ratreg."""

import os
from dataclasses import dataclass, field
from pathlib import Path

from .my_logging import debug_enabled

HISTORY_FILE = "history.duckdb"


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


@dataclass
class RatregSettings:
    """Settings read from RATREG_* environment variables."""

    debug: bool = False
    history_db: str | None = None
    output_dir: Path = field(default_factory=lambda: Path("ratreg-out"))
    max_events_per_tick: int = 1_000_000

    @property
    def history_path(self) -> str:
        """RATREG_HISTORY_DB, else ``history.duckdb`` in the output directory; ``:memory:`` keeps nothing."""
        return self.history_db or str(self.output_dir / HISTORY_FILE)

    @classmethod
    def from_env(cls) -> "RatregSettings":
        """Load settings from the environment, falling back to defaults."""
        return cls(
            debug=debug_enabled(),
            history_db=os.environ.get("RATREG_HISTORY_DB") or None,
            output_dir=Path(os.environ.get("RATREG_OUTPUT_DIR", "ratreg-out")),
            max_events_per_tick=_env_int("RATREG_MAX_EVENTS_PER_TICK", 1_000_000),
        )
