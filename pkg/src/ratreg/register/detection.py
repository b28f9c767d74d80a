"""Client-side misbehaviour detection.

The procedure inspects either the acks of the running write (``SetType.ACKS``)
or the replies collected by the running operation (``SetType.REPLIES``) and
names every server of the honest set whose messages cannot come from a
protocol-abiding server. It does not mutate the client state; the client
applies the returned detections and notifies the other clients.
"""

from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum

from .messages import ServerId, server_index
from .state import AckTriple, ClientState, ReplyTriple


class SetType(str, Enum):
    ACKS = "A"
    REPLIES = "R"


class DetectionReason(str, Enum):
    OMISSION = "omission"
    ACK_TIMESTAMP = "ack-timestamp"
    ACK_FINGERPRINT = "ack-fingerprint"
    MISSING_WRITE = "missing-write"
    TOO_OLD = "too-old"
    TOO_NEW = "too-new"
    WRONG_VALUE = "wrong-value"
    WITNESS_MISMATCH = "witness-mismatch"
    UNWITNESSED = "unwitnessed-timestamp"
    FINGERPRINT_MISMATCH = "fingerprint-mismatch"


@dataclass(frozen=True)
class Detection:
    server: ServerId
    reason: DetectionReason


def by_server(servers: Iterable[ServerId]) -> list[ServerId]:
    return sorted(servers, key=server_index)


class _Collector:
    """Working copy of the honest set; later rules skip servers already caught."""

    def __init__(self, honest: set[ServerId]) -> None:
        self.honest = set(honest)
        self.found: list[Detection] = []

    def flag(self, server: ServerId, reason: DetectionReason) -> None:
        if server in self.honest:
            self.honest.discard(server)
            self.found.append(Detection(server, reason))


def detection(state: ClientState, entries: Iterable[AckTriple] | Iterable[ReplyTriple], set_type: SetType) -> list[Detection]:
    """Servers of ``state.honest`` caught misbehaving in ``entries``, in server order."""
    items = sorted(entries, key=lambda e: (server_index(e[0]), e[1], str(e[2])))
    out = _Collector(state.honest)

    senders = {e[0] for e in items}
    for sid in by_server(out.honest - senders):
        out.flag(sid, DetectionReason.OMISSION)

    if set_type is SetType.ACKS:
        for j, ts, fingerprint in items:  # type: ignore[misc]
            if ts != state.my_last_ts:
                out.flag(j, DetectionReason.ACK_TIMESTAMP)
            elif state.my_last_fingerprint is not None and fingerprint != state.my_last_fingerprint:
                out.flag(j, DetectionReason.ACK_FINGERPRINT)
        return out.found

    if state.writing:
        reported = {e[0] for e in items if e[1] == state.my_last_ts and e[2] is not None and state.my_last_val in e[2]}
        for sid in by_server(out.honest - reported):
            out.flag(sid, DetectionReason.MISSING_WRITE)
        return out.found

    for sid in by_server(out.honest):
        if state.freshest.get(sid, 0) < state.last_ts - 1:
            out.flag(sid, DetectionReason.TOO_OLD)
    for j, ts, _ in items:
        if ts > state.last_ts + 1:
            out.flag(j, DetectionReason.TOO_NEW)
    if state.my_last_val is not None and state.my_last_ts == state.last_ts:
        for j, ts, val in items:
            if ts == state.my_last_ts and (val is None or state.my_last_val not in val):  # type: ignore[operator]
                out.flag(j, DetectionReason.WRONG_VALUE)
    return out.found
