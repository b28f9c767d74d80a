"""Server automaton.

A server keeps its state honestly in every case; a malicious server only
lies in what it sends. Outgoing replies and acks pass through a
``Behaviour``, which may rewrite or drop them.
"""

from typing import Protocol

from ..simnet.engine import Envelope, Network
from ..simnet.trace import WARNING
from .messages import Read, ReadAck, Reply, Write, WriteAck
from .state import ServerState


class Behaviour(Protocol):
    """Filter applied to a server's outgoing messages."""

    def on_reply(self, server: "ServerProcess", reply: Reply, cause: str) -> Reply | None: ...

    def on_ack(self, server: "ServerProcess", ack: WriteAck) -> WriteAck | None: ...


class ServerProcess:
    def __init__(self, pid: str, net: Network, behaviour: Behaviour | None = None) -> None:
        self.pid = pid
        self.net = net
        self.behaviour = behaviour
        self.state = ServerState()

    def current_reply(self) -> Reply:
        s = self.state
        return Reply(
            j=self.pid,
            ts=s.ts,
            val=frozenset(s.val),
            ots=s.old_ts,
            oval=None if s.old_val is None else frozenset(s.old_val),
            fingerprint=s.fingerprint,
            old_fingerprint=s.old_fingerprint,
        )

    def on_deliver(self, envelope: Envelope) -> None:
        msg = envelope.payload
        if isinstance(msg, Read):
            self.state.reading += 1
            self._send_reply("read")
        elif isinstance(msg, ReadAck):
            if self.state.reading == 0:
                self.net.trace.add(self.net.now, WARNING, self.pid, "", "reading-underflow")
            else:
                self.state.reading -= 1
        elif isinstance(msg, Write):
            self._handle_write(msg)

    def on_timer(self, tag: str) -> None:  # noqa: ARG002
        pass

    def _handle_write(self, msg: Write) -> None:
        s = self.state
        if msg.ts > s.ts:
            s.old_ts, s.old_val, s.old_fingerprint = s.ts, s.val, s.fingerprint
            s.ts, s.val, s.fingerprint = msg.ts, {msg.val}, msg.fingerprint
        elif msg.ts == s.ts:
            s.val = s.val | {msg.val}
            if len(s.val) > 1:
                self.net.trace.add(self.net.now, WARNING, self.pid, "", "multiple-values", {"ts": s.ts})
        ack = WriteAck(msg.ts, self.pid, msg.fingerprint)
        out = ack if self.behaviour is None else self.behaviour.on_ack(self, ack)
        if out is not None:
            self.net.send_to_label(self.pid, out)
        if s.reading > 0:
            self._send_reply("write")

    def _send_reply(self, cause: str) -> None:
        reply = self.current_reply()
        out = reply if self.behaviour is None else self.behaviour.on_reply(self, reply, cause)
        if out is not None:
            self.net.send_to_label(self.pid, out)

    def snapshot(self) -> dict[str, object]:
        return self.state.snapshot()
