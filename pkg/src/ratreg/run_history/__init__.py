"""Run history tracking and analysis for ratreg."""

from .history import RunHistory, RunRecord, RunStatistics

__all__ = [
    "RunRecord",
    "RunStatistics",
    "RunHistory",
]
