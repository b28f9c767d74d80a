"""Local state of client and server automata and the operation outcome type."""

from dataclasses import dataclass, field
from enum import Enum

from .messages import RegisterValue, ServerId, Timestamp, ValueSet, sorted_values

# (server, timestamp, value-set) as stored in a client's replies set.
ReplyTriple = tuple[ServerId, Timestamp, ValueSet | None]
# (server, timestamp, fingerprint) as stored in a client's ack sets.
AckTriple = tuple[ServerId, Timestamp, bytes | None]


class ProtocolKind(str, Enum):
    """Protocol selector: base protocol, collaborative detection, fingerprints."""

    P = "p"
    PCV = "pcv"
    PHASH = "phash"

    @property
    def is_variant(self) -> bool:
        return self is not ProtocolKind.P


class OutcomeKind(str, Enum):
    VALUE = "value"
    BOTTOM = "bottom"
    ABORT = "abort"
    OK = "ok"


@dataclass(frozen=True)
class ReadOutcome:
    """Result of an operation: a value, the initial value, an abort, or a completed write."""

    kind: OutcomeKind
    value: RegisterValue | None = None
    ts: Timestamp | None = None

    @classmethod
    def of(cls, value: RegisterValue, ts: Timestamp) -> "ReadOutcome":
        return cls(OutcomeKind.VALUE, value, ts)

    @classmethod
    def bottom(cls, ts: Timestamp = 0) -> "ReadOutcome":
        return cls(OutcomeKind.BOTTOM, None, ts)

    @classmethod
    def abort(cls) -> "ReadOutcome":
        return cls(OutcomeKind.ABORT)

    @classmethod
    def ok(cls, ts: Timestamp) -> "ReadOutcome":
        return cls(OutcomeKind.OK, None, ts)

    @classmethod
    def from_pair(cls, ts: Timestamp, values: ValueSet | None) -> "ReadOutcome":
        """Outcome of a unanimous (ts, value-set) pair; an empty set is the initial value."""
        if not values:
            return cls.bottom(ts)
        return cls.of(sorted_values(values)[0], ts)


@dataclass
class ClientState:
    """Client variables of the read/write automata.

    ``ack`` is pruned once a timestamp is acknowledged by every honest
    server and drives ``last_ts``; ``write_acks`` keeps every ack of the
    running write for the ack detection. ``acked`` remembers which server
    acknowledged which timestamp, for the collaborative variant.
    """

    honest: set[ServerId]
    replies: set[ReplyTriple] = field(default_factory=set)
    freshest: dict[ServerId, Timestamp] = field(default_factory=dict)
    my_last_val: RegisterValue | None = None
    my_last_ts: Timestamp = 0
    my_last_fingerprint: bytes | None = None
    last_ts: Timestamp = 0
    ack: set[AckTriple] = field(default_factory=set)
    write_acks: set[AckTriple] = field(default_factory=set)
    acked: set[tuple[ServerId, Timestamp]] = field(default_factory=set)
    writing: bool = False
    # hash variant: fingerprints carried by acks, per timestamp and server
    ack_fingerprints: dict[Timestamp, dict[ServerId, bytes | None]] = field(default_factory=dict)
    known: dict[Timestamp, bytes] = field(default_factory=dict)

    @classmethod
    def initial(cls, servers: list[ServerId]) -> "ClientState":
        return cls(honest=set(servers))

    def clear_replies(self) -> None:
        self.replies.clear()
        self.freshest.clear()

    def add_reply(self, j: ServerId, ts: Timestamp, val: ValueSet, ots: Timestamp, oval: ValueSet | None) -> None:
        self.replies.add((j, ts, val))
        self.replies.add((j, ots, oval))
        self.freshest[j] = max(self.freshest.get(j, ts), ts, ots)

    def unanimous_pair(self) -> tuple[Timestamp, ValueSet | None] | None:
        """Highest-timestamp pair reported by every server of the honest set."""
        if not self.honest:
            return None
        pairs: set[tuple[Timestamp, ValueSet | None]] | None = None
        for sid in self.honest:
            reported = {(ts, val) for (j, ts, val) in self.replies if j == sid}
            pairs = reported if pairs is None else pairs & reported
            if not pairs:
                return None
        assert pairs is not None
        return max(pairs, key=lambda pair: (pair[0], [str(v) for v in sorted_values(pair[1] or ())]))


@dataclass
class ServerState:
    """Server variables; ``val`` is a set as in the write handler's union branch."""

    val: set[RegisterValue] = field(default_factory=set)
    ts: Timestamp = 0
    old_val: set[RegisterValue] | None = None
    old_ts: Timestamp = 0
    reading: int = 0
    fingerprint: bytes | None = None
    old_fingerprint: bytes | None = None

    def snapshot(self) -> dict[str, object]:
        return {
            "ts": self.ts,
            "val": sorted_values(self.val),
            "old_ts": self.old_ts,
            "reading": self.reading,
        }
