"""Virtual time and channel delay bounds."""

from dataclasses import dataclass
from enum import Enum

from ..errors import ModelViolationError

# Ticks of the fictional global clock.
VirtualTime = int


class DelayPolicy(str, Enum):
    """How per-message delays are chosen."""

    UNIFORM = "uniform"  # drawn from [1, bound]
    WORST_CASE = "worst_case"  # always the bound


class ChannelKind(str, Enum):
    """Channel classes of the system model."""

    BROADCAST = "broadcast"  # client -> all servers, bound delta
    LABEL = "label"  # server/client -> every client sharing the label, bound delta_prime


@dataclass(frozen=True)
class TimingParams:
    """Delay bounds: ``delta`` for the broadcast, ``delta_prime`` for anonymous channels."""

    delta: int = 10
    delta_prime: int = 5

    def __post_init__(self) -> None:
        if self.delta < 1 or self.delta_prime < 1:
            raise ModelViolationError(f"delay bounds must be positive, got delta={self.delta} delta_prime={self.delta_prime}")
        if self.delta_prime > self.delta:
            raise ModelViolationError(f"delta_prime ({self.delta_prime}) must not exceed delta ({self.delta})")

    def bound(self, channel: ChannelKind) -> int:
        """Delay bound of a channel class."""
        return self.delta if channel is ChannelKind.BROADCAST else self.delta_prime
