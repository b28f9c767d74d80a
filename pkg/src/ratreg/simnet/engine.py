"""Deterministic discrete-event engine.

The engine owns the virtual clock, the event queue and every channel of the
system model. Processes register handlers and only ever talk to each other
through :class:`Network`; the engine stamps the true sender on every
envelope, so the ``sender`` a handler sees cannot be forged.
"""

import heapq
import logging
import random
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Protocol

from ..errors import LivelockError, ModelViolationError
from ..my_logging import debug_log
from .timing import ChannelKind, DelayPolicy, TimingParams, VirtualTime
from .trace import CRASH, DELIVER, SEND, TIMER, Trace

logger = logging.getLogger(__name__)

# Shared identifier of every client on the anonymous channel.
CLIENT_LABEL = "clients"


class Payload(Protocol):
    """Anything carried by an envelope; the trace stores its summary."""

    def summary(self) -> str: ...


class Process(Protocol):
    """Event handlers a registered process implements."""

    pid: str

    def on_deliver(self, envelope: "Envelope") -> None: ...

    def on_timer(self, tag: str) -> None: ...


class EventClass(IntEnum):
    """Rank of an event among those due at the same tick."""

    CRASH = 0
    DELIVER = 1
    TIMER = 2


@dataclass(frozen=True, slots=True)
class Envelope:
    """A message in flight.

    ``sender`` is what the recipient sees: a server id, or the client label for
    anything a client sends. ``origin`` is the simulator-internal originating
    process and only reaches the trace.
    """

    sender: str
    recipient: str
    payload: Any
    sent_at: VirtualTime
    deliver_at: VirtualTime
    origin: str


@dataclass(order=True, slots=True)
class _Event:
    tick: VirtualTime
    rank: EventClass
    seq: int
    target: str = field(compare=False)
    envelope: Envelope | None = field(compare=False, default=None)
    tag: str = field(compare=False, default="")


class EventQueue:
    """Time-ordered queue; pop order is (tick, event class, insertion sequence)."""

    def __init__(self) -> None:
        self._heap: list[_Event] = []
        self._seq = 0

    def push(self, tick: VirtualTime, rank: EventClass, target: str, envelope: Envelope | None = None, tag: str = "") -> None:
        heapq.heappush(self._heap, _Event(tick, rank, self._seq, target, envelope, tag))
        self._seq += 1

    def pop(self) -> _Event:
        return heapq.heappop(self._heap)

    def peek_tick(self) -> VirtualTime | None:
        return self._heap[0].tick if self._heap else None

    def envelopes(self) -> list[Envelope]:
        """Envelopes still queued, in no particular order."""
        return [e.envelope for e in self._heap if e.envelope is not None]

    def __len__(self) -> int:
        return len(self._heap)


class Network:
    """The world: clock, processes, channels and the trace they write to."""

    def __init__(
        self,
        timing: TimingParams,
        rng: random.Random,
        policy: DelayPolicy = DelayPolicy.UNIFORM,
        trace: Trace | None = None,
        max_events_per_tick: int = 1_000_000,
    ) -> None:
        self.timing = timing
        self.rng = rng
        self.policy = policy
        self.trace = trace if trace is not None else Trace()
        self.max_events_per_tick = max_events_per_tick
        self.now: VirtualTime = 0
        self.queue = EventQueue()
        self._servers: dict[str, Process] = {}
        self._clients: dict[str, Process] = {}
        self._others: dict[str, Process] = {}
        self._crashed_at: dict[str, VirtualTime] = {}

    # -- registration -----------------------------------------------------

    def add_server(self, process: Process) -> None:
        self._servers[process.pid] = process

    def add_client(self, process: Process) -> None:
        self._clients[process.pid] = process

    def add_process(self, process: Process) -> None:
        """Register a process that only uses timers (e.g. a workload driver)."""
        self._others[process.pid] = process

    @property
    def server_ids(self) -> list[str]:
        return list(self._servers)

    @property
    def client_ids(self) -> list[str]:
        return list(self._clients)

    def _process(self, pid: str) -> Process:
        for table in (self._servers, self._clients, self._others):
            if pid in table:
                return table[pid]
        raise KeyError(f"unknown process {pid!r}")

    # -- failures ---------------------------------------------------------

    def schedule_crash(self, pid: str, at: VirtualTime) -> None:
        """Crash ``pid`` at tick ``at``; it processes nothing from then on."""
        if at < self.now:
            raise ModelViolationError(f"crash of {pid} at {at} is in the past (now={self.now})")
        self._process(pid)
        previous = self._crashed_at.get(pid)
        self._crashed_at[pid] = at if previous is None else min(previous, at)
        self.queue.push(at, EventClass.CRASH, pid)

    def is_alive(self, pid: str, at: VirtualTime | None = None) -> bool:
        tick = self.now if at is None else at
        crash = self._crashed_at.get(pid)
        return crash is None or tick < crash

    def alive_servers(self) -> list[str]:
        return [sid for sid in self._servers if self.is_alive(sid)]

    # -- channels ---------------------------------------------------------

    def _draw_delay(self, bound: int) -> int:
        if self.policy is DelayPolicy.WORST_CASE:
            return bound
        return self.rng.randint(1, bound)

    def _check_delay(self, delay: int, channel: ChannelKind) -> None:
        bound = self.timing.bound(channel)
        if delay < 1 or delay > bound:
            raise ModelViolationError(f"delay {delay} outside [1, {bound}] on the {channel.value} channel")

    def _schedule(self, origin: str, sender: str, recipient: str, payload: Any, delay: int) -> None:
        envelope = Envelope(sender, recipient, payload, self.now, self.now + delay, origin)
        self.queue.push(envelope.deliver_at, EventClass.DELIVER, recipient, envelope=envelope)
        data = {"origin": origin} if origin != sender else None
        self.trace.add(self.now, SEND, sender, recipient, payload.summary(), data)

    def broadcast_to_servers(self, origin: str, payload: Payload, delays: dict[str, int] | None = None) -> None:
        """Timely reliable broadcast from a client to every alive server.

        ``delays`` pins per-server delays; missing entries are drawn.
        """
        for sid in self._servers:
            if not self.is_alive(sid):
                continue
            delay = delays[sid] if delays and sid in delays else self._draw_delay(self.timing.delta)
            self._check_delay(delay, ChannelKind.BROADCAST)
            self._schedule(origin, CLIENT_LABEL, sid, payload, delay)

    def send_to_label(self, origin: str, payload: Payload, delays: dict[str, int] | None = None) -> None:
        """Anonymous send to every client sharing the label.

        Servers appear under their own id; clients appear as the label.
        """
        sender = origin if origin in self._servers else CLIENT_LABEL
        for cid in self._clients:
            delay = delays[cid] if delays and cid in delays else self._draw_delay(self.timing.delta_prime)
            self._check_delay(delay, ChannelKind.LABEL)
            self._schedule(origin, sender, cid, payload, delay)

    def set_timer(self, owner: str, fire_at: VirtualTime, tag: str) -> None:
        if fire_at < self.now:
            raise ModelViolationError(f"timer {tag!r} for {owner} at {fire_at} is in the past (now={self.now})")
        self.queue.push(fire_at, EventClass.TIMER, owner, tag=tag)

    # -- main loop --------------------------------------------------------

    def run_until(self, t_end: VirtualTime) -> Trace:
        """Process every event due at or before ``t_end``; the clock ends at ``t_end``."""
        events_this_tick = 0
        current_tick = self.now
        while self.queue and (head := self.queue.peek_tick()) is not None and head <= t_end:
            event = self.queue.pop()
            if event.tick != current_tick:
                current_tick = event.tick
                events_this_tick = 0
            events_this_tick += 1
            if events_this_tick > self.max_events_per_tick:
                raise LivelockError(f"more than {self.max_events_per_tick} events at tick {current_tick} without time advancing")
            self.now = event.tick
            self._dispatch(event)
        self.now = max(self.now, t_end)
        debug_log("run finished", tick=self.now, records=len(self.trace), pending=len(self.queue))
        return self.trace

    def _dispatch(self, event: _Event) -> None:
        if event.rank is EventClass.CRASH:
            if self._crashed_at.get(event.target) == event.tick:
                self.trace.add(self.now, CRASH, event.target)
                logger.info("process %s crashed at tick %d", event.target, self.now)
            return
        if not self.is_alive(event.target):
            return
        process = self._process(event.target)
        if event.rank is EventClass.DELIVER:
            assert event.envelope is not None
            env = event.envelope
            data = {"origin": env.origin} if env.origin != env.sender else None
            self.trace.add(self.now, DELIVER, env.sender, env.recipient, env.payload.summary(), data)
            process.on_deliver(env)
        else:
            self.trace.add(self.now, TIMER, event.target, event.target, event.tag)
            process.on_timer(event.tag)

    def pending_envelopes(self) -> Iterable[Envelope]:
        """Envelopes sent but not yet delivered."""
        return self.queue.envelopes()
