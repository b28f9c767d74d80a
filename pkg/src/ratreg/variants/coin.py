"""Biased coin deciding whether a variant fallback runs its extra check."""

import random
from dataclasses import dataclass, field

from ..errors import InvalidParameterError


@dataclass
class Coin:
    """Seeded coin returning True with probability ``p``."""

    p: float = 0.5
    rng: random.Random = field(default_factory=lambda: random.Random(0))
    flips: int = 0
    heads: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise InvalidParameterError(f"coin probability must lie in [0, 1], got {self.p}")

    def flip(self) -> bool:
        result = self.rng.random() < self.p
        self.flips += 1
        self.heads += int(result)
        return result

    @property
    def rate(self) -> float:
        return self.heads / self.flips if self.flips else 0.0
