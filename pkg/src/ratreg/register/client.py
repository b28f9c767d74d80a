"""Client automaton: read and write operations plus message handlers.

An operation is a generator that yields how many ticks to wait; the client
arms a timer for each yield and resumes the generator when it fires. The
generator's return value is the operation outcome.
"""

import logging
from collections.abc import Callable, Generator, Iterable
from dataclasses import dataclass
from typing import Any

from ..errors import InvalidParameterError, ProtocolMisuseError
from ..simnet.engine import Envelope, Network
from ..simnet.timing import TimingParams
from ..simnet.trace import COIN, DETECT, DETECTION_RUN, FINGERPRINT, NOTE, OP_INVOKE, OP_RETURN, WARNING
from ..variants.coin import Coin
from ..variants.collaborative import cv_read_fallback, should_vouch
from ..variants.fingerprint import FingerprintFn, sha256_fingerprint
from ..variants.hashing import hash_read_verify, hash_write_decorate, refresh_known
from .detection import Detection, SetType, by_server, detection
from .messages import (
    FORGED_PREFIX,
    CheckReply,
    CheckTs,
    Detected,
    Read,
    ReadAck,
    RegisterValue,
    Reply,
    ServerId,
    Timestamp,
    Write,
    WriteAck,
    sorted_values,
)
from .state import AckTriple, ClientState, ProtocolKind, ReadOutcome, ReplyTriple

logger = logging.getLogger(__name__)

Steps = Generator[int, None, ReadOutcome]


@dataclass
class Operation:
    op_id: int
    kind: str  # "read" | "write"
    value: RegisterValue | None
    started_at: int
    steps: Steps


def _entry_json(entry: AckTriple | ReplyTriple) -> list[Any]:
    j, ts, extra = entry
    if isinstance(extra, bytes):
        return [j, ts, extra.hex()]
    return [j, ts, None if extra is None else sorted_values(extra)]


class ClientProcess:
    """One anonymous client."""

    def __init__(
        self,
        pid: str,
        net: Network,
        servers: list[ServerId],
        protocol: ProtocolKind = ProtocolKind.P,
        coin: Coin | None = None,
        fingerprint_fn: FingerprintFn = sha256_fingerprint,
        on_complete: Callable[["ClientProcess", Operation, ReadOutcome], None] | None = None,
    ) -> None:
        self.pid = pid
        self.net = net
        self.timing: TimingParams = net.timing
        self.protocol = protocol
        self.coin = coin if coin is not None else Coin()
        self.fingerprint_fn = fingerprint_fn
        self.on_complete = on_complete
        self.state = ClientState.initial(servers)
        self.completed: list[tuple[Operation, ReadOutcome]] = []
        self._op: Operation | None = None
        self._witnesses: dict[Timestamp, RegisterValue] | None = None

    @property
    def busy(self) -> bool:
        return self._op is not None

    @property
    def current_op(self) -> Operation | None:
        return self._op

    # -- invocation -------------------------------------------------------

    def invoke_read(self, op_id: int) -> None:
        self._start(Operation(op_id, "read", None, self.net.now, self._read()))

    def invoke_write(self, op_id: int, value: RegisterValue) -> None:
        if isinstance(value, str) and value.startswith(FORGED_PREFIX):
            raise InvalidParameterError(f"written values may not start with {FORGED_PREFIX!r}: {value!r}")
        self._start(Operation(op_id, "write", value, self.net.now, self._write(value)))

    def _start(self, op: Operation) -> None:
        if self._op is not None:
            raise ProtocolMisuseError(f"{self.pid} invoked {op.kind} #{op.op_id} while {self._op.kind} #{self._op.op_id} is running")
        self._op = op
        payload = "read()" if op.kind == "read" else f"write({op.value!r})"
        data: dict[str, Any] = {"op_id": op.op_id, "op": op.kind}
        if op.kind == "write":
            data["value"] = op.value
        self.net.trace.add(self.net.now, OP_INVOKE, self.pid, "", payload, data)
        self._resume()

    def _resume(self) -> None:
        op = self._op
        assert op is not None
        try:
            wait = next(op.steps)
        except StopIteration as stop:
            self._finish(op, stop.value)
            return
        self.net.set_timer(self.pid, self.net.now + wait, str(op.op_id))

    def _finish(self, op: Operation, outcome: ReadOutcome) -> None:
        self._op = None
        self.completed.append((op, outcome))
        data: dict[str, Any] = {"op_id": op.op_id, "op": op.kind, "outcome": outcome.kind.value, "value": outcome.value, "ts": outcome.ts}
        self.net.trace.add(self.net.now, OP_RETURN, self.pid, "", outcome.kind.value, data)
        if self.on_complete is not None:
            self.on_complete(self, op, outcome)

    # -- operations -------------------------------------------------------

    def _read(self) -> Steps:
        s = self.state
        delta = self.timing.delta
        if s.last_ts == 0:
            return ReadOutcome.bottom()
        s.clear_replies()
        self._broadcast(Read())
        yield 2 * delta
        if (pair := s.unanimous_pair()) is not None:
            self._broadcast(ReadAck())
            return ReadOutcome.from_pair(*pair)
        yield delta
        if (pair := s.unanimous_pair()) is not None:
            self._broadcast(ReadAck())
            return ReadOutcome.from_pair(*pair)

        self.run_detection(s.replies, SetType.REPLIES)
        if self.protocol is ProtocolKind.PCV:
            outcome = yield from cv_read_fallback(self, self.coin)
        else:
            if self.protocol is ProtocolKind.PHASH:
                self._verify_fingerprints()
            pair = s.unanimous_pair()
            outcome = ReadOutcome.from_pair(*pair) if pair else ReadOutcome.abort()
        self._broadcast(ReadAck())
        return outcome

    def _write(self, value: RegisterValue) -> Steps:
        s = self.state
        delta = self.timing.delta
        masked = self.protocol is ProtocolKind.P
        s.writing = True
        s.ack.clear()
        s.write_acks.clear()
        s.my_last_ts = s.last_ts + 1
        s.my_last_val = value
        msg = Write(value, s.my_last_ts)
        if self.protocol is ProtocolKind.PHASH:
            msg = hash_write_decorate(msg, self.fingerprint_fn)
            s.my_last_fingerprint = msg.fingerprint
            self._count_fingerprints(1)
        self._broadcast(msg)
        yield delta
        if masked:
            s.clear_replies()
            self._broadcast(Read())
        yield delta
        if masked:
            self._broadcast(Read())
        self.run_detection(s.write_acks, SetType.ACKS)
        yield delta
        if masked:
            self.run_detection(s.replies, SetType.REPLIES)
            self._broadcast(ReadAck())
            self._broadcast(ReadAck())
        s.writing = False
        return ReadOutcome.ok(s.my_last_ts)

    def _verify_fingerprints(self) -> None:
        s = self.state
        result = hash_read_verify(s, s.replies, self.coin, s.known, self.fingerprint_fn)
        self.record_coin(result.ran)
        if result.fingerprint_ops:
            self._count_fingerprints(result.fingerprint_ops)
        self.apply_detections(result.detections)

    # -- detection --------------------------------------------------------

    def run_detection(self, entries: Iterable[AckTriple] | Iterable[ReplyTriple], set_type: SetType) -> list[Detection]:
        s = self.state
        items = list(entries)
        self.net.trace.add(
            self.net.now,
            DETECTION_RUN,
            self.pid,
            "",
            set_type.value,
            {
                "op_id": self._op_id(),
                "set_type": set_type.value,
                "entries": sorted((_entry_json(e) for e in items), key=str),
                "honest": by_server(s.honest),
                "last_ts": s.last_ts,
                "my_last_ts": s.my_last_ts,
                "my_last_val": s.my_last_val,
                "my_fingerprint": s.my_last_fingerprint.hex() if s.my_last_fingerprint else None,
                "writing": s.writing,
                "freshest": {sid: s.freshest[sid] for sid in by_server(s.freshest)},
            },
        )
        found = detection(s, items, set_type)
        self.apply_detections(found)
        return found

    def apply_detections(self, detections: list[Detection]) -> None:
        s = self.state
        changed = False
        for d in detections:
            if d.server not in s.honest:
                continue
            s.honest.discard(d.server)
            changed = True
            self.net.trace.add(self.net.now, DETECT, self.pid, d.server, d.reason.value, {"op_id": self._op_id(), "reason": d.reason.value})
            logger.info("%s detected %s (%s) at tick %d", self.pid, d.server, d.reason.value, self.net.now)
            self.net.send_to_label(self.pid, Detected(d.server))
        if changed:
            self._honest_changed()

    def _honest_changed(self) -> None:
        if not self.state.honest:
            self.net.trace.add(self.net.now, WARNING, self.pid, "", "honest-set-empty", {"op_id": self._op_id()})
        self._propagate_last_ts()
        if self.protocol is ProtocolKind.PHASH:
            refresh_known(self.state)

    def _propagate_last_ts(self) -> None:
        s = self.state
        while s.honest:
            for ts in sorted({t for (_, t, _) in s.ack}):
                senders = {j for (j, t, _) in s.ack if t == ts}
                if senders >= s.honest:
                    if ts >= s.last_ts:
                        s.last_ts = ts
                    s.ack = {e for e in s.ack if e[1] != ts}
                    break
            else:
                return

    # -- collaborative witness port -----------------------------------------

    def record_coin(self, heads: bool) -> None:
        data = {"op_id": self._op_id(), "protocol": self.protocol.value, "heads": heads}
        self.net.trace.add(self.net.now, COIN, self.pid, "", "heads" if heads else "tails", data)

    def open_witness_window(self, request: CheckTs) -> None:
        self._witnesses = {}
        self.net.send_to_label(self.pid, request)

    def close_witness_window(self) -> dict[Timestamp, RegisterValue]:
        witnesses, self._witnesses = self._witnesses or {}, None
        return witnesses

    def note(self, text: str) -> None:
        self.net.trace.add(self.net.now, NOTE, self.pid, "", text, {"op_id": self._op_id()})

    # -- engine hooks -----------------------------------------------------

    def on_timer(self, tag: str) -> None:
        if self._op is None or str(self._op.op_id) != tag:
            return
        self._resume()

    def on_deliver(self, envelope: Envelope) -> None:
        msg = envelope.payload
        s = self.state
        if isinstance(msg, Reply):
            if self._op is not None:
                s.add_reply(msg.j, msg.ts, msg.val, msg.ots, msg.oval)
        elif isinstance(msg, WriteAck):
            self._handle_write_ack(msg)
        elif isinstance(msg, Detected):
            if msg.server in s.honest:
                s.honest.discard(msg.server)
                self._honest_changed()
        elif isinstance(msg, CheckTs):
            if self.protocol is ProtocolKind.PCV and should_vouch(s, msg):
                assert s.my_last_val is not None
                self.net.send_to_label(self.pid, CheckReply(s.my_last_ts, s.my_last_val))
        elif isinstance(msg, CheckReply):
            if self._witnesses is not None:
                self._witnesses[msg.ts] = msg.val
        else:
            logger.warning("%s ignored unexpected %s", self.pid, msg.summary())

    def _handle_write_ack(self, msg: WriteAck) -> None:
        s = self.state
        entry = (msg.j, msg.ts, msg.fingerprint)
        if msg.ts >= s.my_last_ts:
            s.ack.add(entry)
        if s.writing and msg.ts >= s.my_last_ts:
            s.write_acks.add(entry)
        s.acked.add((msg.j, msg.ts))
        if self.protocol is ProtocolKind.PHASH and msg.ts >= s.last_ts - 1:
            s.ack_fingerprints.setdefault(msg.ts, {})[msg.j] = msg.fingerprint
        self._propagate_last_ts()
        if self.protocol is ProtocolKind.PHASH:
            refresh_known(s)

    # -- helpers ----------------------------------------------------------

    def _broadcast(self, msg: Read | ReadAck | Write) -> None:
        self.net.broadcast_to_servers(self.pid, msg)

    def _count_fingerprints(self, count: int) -> None:
        self.net.trace.add(self.net.now, FINGERPRINT, self.pid, "", str(count), {"op_id": self._op_id(), "count": count})

    def _op_id(self) -> int | None:
        return self._op.op_id if self._op is not None else None

    def snapshot(self) -> dict[str, Any]:
        return {"last_ts": self.state.last_ts, "honest": by_server(self.state.honest)}
