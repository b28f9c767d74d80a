"""Two-party Bayesian game between a client and a rational malicious server.

The server does not know whether a request comes from a client able to detect
misbehaviour (risky) or not (risk-less); it holds a belief ``theta`` that the
request is risky and picks among three strategies:

- ``Silent``: omit the answer. Always detected by the omission check.
- ``NotAttack``: follow the protocol.
- ``Attack``: answer with a wrong value, timestamp or both.
"""

from dataclasses import dataclass
from enum import Enum

from ..errors import InvalidParameterError

# Threshold comparisons absorb floating rounding at this scale.
TIE_TOLERANCE = 1e-12


class Strategy(str, Enum):
    """Server strategies of the game."""

    ATTACK = "Attack"
    NOT_ATTACK = "NotAttack"
    SILENT = "Silent"


@dataclass(frozen=True)
class PayoffParams:
    """Gains and losses of both players.

    Attributes:
        g_c: Client gain on a successful read.
        d_c: Client gain when it detects the server.
        g_s: Server gain when it prevents a correct read.
        d_s: Server loss when it is detected.
    """

    g_c: float = 1.0
    d_c: float = 1.0
    g_s: float = 1.0
    d_s: float = 1.0

    def __post_init__(self) -> None:
        for name in ("g_c", "d_c", "g_s", "d_s"):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidParameterError(f"payoff parameter {name} must be > 0, got {value}")


@dataclass(frozen=True)
class Belief:
    """Server belief that an incoming request is risky."""

    theta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise InvalidParameterError(f"theta must lie in [0, 1], got {self.theta}")

    @classmethod
    def from_client_count(cls, clients: int) -> "Belief":
        """Belief when exactly one of ``clients`` anonymous clients is the risky one."""
        if clients < 1:
            raise InvalidParameterError(f"client count must be >= 1, got {clients}")
        return cls(theta=1.0 / clients)


def _theta(theta: Belief | float) -> float:
    return theta.theta if isinstance(theta, Belief) else Belief(theta).theta


def expected_gain(strategy: Strategy, theta: Belief | float, p: PayoffParams) -> float:
    """Expected server gain of ``strategy`` under belief ``theta``."""
    t = _theta(theta)
    if strategy is Strategy.SILENT:
        return -p.d_s
    if strategy is Strategy.NOT_ATTACK:
        return 0.0
    return (1.0 - t) * p.g_s - t * p.d_s


def attack_threshold(p: PayoffParams) -> float:
    """Belief below which attacking is strictly better than following the protocol."""
    return p.g_s / (p.g_s + p.d_s)


def best_response(theta: Belief | float, p: PayoffParams) -> Strategy:
    """Closed-form best response; ties at the threshold go to NotAttack."""
    t = _theta(theta)
    if attack_threshold(p) - t > TIE_TOLERANCE:
        return Strategy.ATTACK
    return Strategy.NOT_ATTACK


def brute_force_best_response(theta: Belief | float, p: PayoffParams) -> Strategy:
    """Best response found by evaluating every strategy; used to cross-check ``best_response``."""
    t = _theta(theta)
    gains = {strategy: expected_gain(strategy, t, p) for strategy in Strategy}
    best = Strategy.NOT_ATTACK
    for strategy in (Strategy.ATTACK, Strategy.SILENT):
        if gains[strategy] - gains[best] > TIE_TOLERANCE:
            best = strategy
    return best


def outcome(strategy: Strategy, risky: bool, p: PayoffParams) -> tuple[float, float]:
    """(client, server) payoff pair at a leaf of the extensive form."""
    if strategy is Strategy.NOT_ATTACK:
        return (p.g_c, 0.0)
    if strategy is Strategy.SILENT or risky:
        return (p.d_c, -p.d_s)
    return (-p.g_c, p.g_s)


def expected_client_gain(strategy: Strategy, theta: Belief | float, p: PayoffParams) -> float:
    """Client expectation over the risky/risk-less branch for a given server strategy."""
    t = _theta(theta)
    risky_client, _ = outcome(strategy, True, p)
    riskless_client, _ = outcome(strategy, False, p)
    return t * risky_client + (1.0 - t) * riskless_client


def loss_outweighs_gains(p: PayoffParams, clients: int) -> bool:
    """Whether the loss on detection outweighs the gain summed over ``clients`` readers (D_s > c * G_s)."""
    return p.d_s > clients * p.g_s
