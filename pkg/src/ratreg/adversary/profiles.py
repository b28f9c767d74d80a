"""Ground-truth behaviour assigned to each server by a scenario."""

from dataclasses import dataclass, field
from enum import Enum

from ..errors import InvalidParameterError
from ..game.payoffs import Belief, PayoffParams, Strategy


class ProfileKind(str, Enum):
    HONEST = "honest"
    CRASH = "crash"
    SCRIPTED = "scripted"
    RATIONAL = "rational"


class CorruptionAction(str, Enum):
    WRONG_VALUE = "WrongValue"
    WRONG_TIMESTAMP = "WrongTimestamp"
    WRONG_BOTH = "WrongBoth"
    OMIT = "Omit"

    @property
    def strategy(self) -> Strategy:
        return Strategy.SILENT if self is CorruptionAction.OMIT else Strategy.ATTACK


class MessageTarget(str, Enum):
    REPLY = "reply"
    ACK = "ack"
    ANY = "any"


class RequestKind(str, Enum):
    """Request that caused an outgoing message: replies answer READs, acks and forwarded replies answer WRITEs."""

    READ = "read"
    WRITE = "write"
    ANY = "any"


@dataclass(frozen=True)
class ScriptRule:
    """When and how a scripted server corrupts its outgoing messages.

    The rule matches messages of ``target`` caused by ``request`` within the
    tick window; of those, every ``every``-th one is corrupted with
    probability ``probability``. ``delta`` pins the timestamp shift instead of
    drawing it.
    """

    action: CorruptionAction
    target: MessageTarget = MessageTarget.REPLY
    request: RequestKind = RequestKind.ANY
    from_tick: int = 0
    until_tick: int | None = None
    every: int = 1
    probability: float = 1.0
    delta: int | None = None

    def __post_init__(self) -> None:
        if self.every < 1:
            raise InvalidParameterError(f"rule period must be >= 1, got {self.every}")
        if not 0.0 <= self.probability <= 1.0:
            raise InvalidParameterError(f"rule probability must lie in [0, 1], got {self.probability}")
        if self.delta == 0:
            raise InvalidParameterError("a timestamp shift of 0 is not a corruption")

    def matches(self, target: MessageTarget, request: RequestKind, tick: int) -> bool:
        if self.target is not MessageTarget.ANY and self.target is not target:
            return False
        if self.request is not RequestKind.ANY and self.request is not request:
            return False
        return tick >= self.from_tick and (self.until_tick is None or tick <= self.until_tick)


@dataclass(frozen=True)
class ServerProfile:
    kind: ProfileKind = ProfileKind.HONEST
    crash_at: int | None = None
    rules: tuple[ScriptRule, ...] = field(default_factory=tuple)
    belief: Belief | None = None
    payoffs: PayoffParams = field(default_factory=PayoffParams)
    action: CorruptionAction = CorruptionAction.WRONG_VALUE

    def __post_init__(self) -> None:
        if self.kind is ProfileKind.CRASH and self.crash_at is None:
            raise InvalidParameterError("a crash profile needs a crash tick")
        if self.kind is ProfileKind.RATIONAL and self.belief is None:
            raise InvalidParameterError("a rational profile needs a belief")
        if self.kind is ProfileKind.RATIONAL and self.action is CorruptionAction.OMIT:
            raise InvalidParameterError("a rational server attacks with a wrong reply; omission is never a best response")

    @classmethod
    def honest(cls) -> "ServerProfile":
        return cls()

    @classmethod
    def crash(cls, at: int) -> "ServerProfile":
        return cls(kind=ProfileKind.CRASH, crash_at=at)

    @classmethod
    def scripted(cls, *rules: ScriptRule) -> "ServerProfile":
        return cls(kind=ProfileKind.SCRIPTED, rules=tuple(rules))

    @classmethod
    def rational(cls, belief: Belief | float, payoffs: PayoffParams | None = None, action: CorruptionAction = CorruptionAction.WRONG_VALUE) -> "ServerProfile":
        b = belief if isinstance(belief, Belief) else Belief(belief)
        return cls(kind=ProfileKind.RATIONAL, belief=b, payoffs=payoffs or PayoffParams(), action=action)

    @property
    def is_malicious(self) -> bool:
        return self.kind in (ProfileKind.SCRIPTED, ProfileKind.RATIONAL)

    @property
    def is_honest_alive(self) -> bool:
        """Honest and never crashes."""
        return self.kind is ProfileKind.HONEST
