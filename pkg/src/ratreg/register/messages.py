"""Wire messages exchanged by clients and servers.

Values stored by servers are sets; on the wire they travel as frozensets and
compare canonically. ``None`` stands for the bottom value.
"""

from collections.abc import Iterable
from dataclasses import dataclass
from typing import ClassVar

RegisterValue = int | str
ValueSet = frozenset[RegisterValue]
ServerId = str
Timestamp = int

# Prefix reserved for values forged by malicious servers.
FORGED_PREFIX = "forged:"


def sorted_values(values: Iterable[RegisterValue]) -> list[RegisterValue]:
    """Deterministic order over mixed int/str values."""
    return sorted(values, key=lambda v: (type(v).__name__, str(v)))


def render(values: ValueSet | None) -> str:
    if values is None:
        return "⊥"
    return "{" + ",".join(repr(v) for v in sorted_values(values)) + "}"


def server_index(sid: ServerId) -> int:
    """Numeric index of a server id such as ``s3``."""
    return int(sid.lstrip("s"))


def fp_text(fingerprint: bytes | None) -> str:
    return "" if fingerprint is None else f",fp={fingerprint.hex()[:8]}"


@dataclass(frozen=True, slots=True)
class Read:
    kind: ClassVar[str] = "READ"

    def summary(self) -> str:
        return "READ()"


@dataclass(frozen=True, slots=True)
class ReadAck:
    kind: ClassVar[str] = "READ_ACK"

    def summary(self) -> str:
        return "READ_ACK()"


@dataclass(frozen=True, slots=True)
class Reply:
    """Current and old (timestamp, value-set) pairs of server ``j``."""

    kind: ClassVar[str] = "REPLY"

    j: ServerId
    ts: Timestamp
    val: ValueSet
    ots: Timestamp
    oval: ValueSet | None
    fingerprint: bytes | None = None
    old_fingerprint: bytes | None = None

    def summary(self) -> str:
        return f"REPLY({self.j},{self.ts},{render(self.val)},{self.ots},{render(self.oval)}{fp_text(self.fingerprint)})"


@dataclass(frozen=True, slots=True)
class Write:
    kind: ClassVar[str] = "WRITE"

    val: RegisterValue
    ts: Timestamp
    fingerprint: bytes | None = None

    def summary(self) -> str:
        return f"WRITE({self.val!r},{self.ts}{fp_text(self.fingerprint)})"


@dataclass(frozen=True, slots=True)
class WriteAck:
    kind: ClassVar[str] = "WRITE_ACK"

    ts: Timestamp
    j: ServerId
    fingerprint: bytes | None = None

    def summary(self) -> str:
        return f"WRITE_ACK({self.ts},{self.j}{fp_text(self.fingerprint)})"


@dataclass(frozen=True, slots=True)
class Detected:
    kind: ClassVar[str] = "DETECTED"

    server: ServerId

    def summary(self) -> str:
        return f"DETECTED({self.server})"


@dataclass(frozen=True, slots=True)
class CheckTs:
    """Collaborative check: asks writers of these timestamps to vouch for their value."""

    kind: ClassVar[str] = "CHECK_TS"

    timestamps: tuple[Timestamp, ...]

    def summary(self) -> str:
        return f"CHECK_TS({','.join(map(str, self.timestamps))})"


@dataclass(frozen=True, slots=True)
class CheckReply:
    kind: ClassVar[str] = "CHECK_REPLY"

    ts: Timestamp
    val: RegisterValue

    def summary(self) -> str:
        return f"CHECK_REPLY({self.ts},{self.val!r})"


Message = Read | ReadAck | Reply | Write | WriteAck | Detected | CheckTs | CheckReply

# Message kinds that count towards protocol message complexity.
PROTOCOL_KINDS = ("READ", "REPLY", "READ_ACK", "WRITE", "WRITE_ACK", "CHECK_TS", "CHECK_REPLY")
NOTIFICATION_KINDS = ("DETECTED",)
