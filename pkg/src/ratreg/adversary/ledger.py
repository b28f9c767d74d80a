"""Realized payoffs of the game, settled per read interaction."""

from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field

from ..game.payoffs import PayoffParams
from ..simnet.trace import CORRUPT, DETECT, Trace
from .profiles import ServerProfile


@dataclass(frozen=True)
class ReadInteraction:
    """What the ledger needs to know about one completed read."""

    op_id: int
    reader: str
    t_b: int
    t_e: int
    prevented: bool  # returned Abort or a value the validity check rejects


@dataclass
class ServerTally:
    interactions: int = 0
    attacks: int = 0
    detected: int = 0
    prevented: int = 0
    utility: float = 0.0


@dataclass
class PayoffLedger:
    servers: dict[str, ServerTally] = field(default_factory=dict)
    client_utility: float = 0.0

    def record_payoff(self, server: str, payoffs: PayoffParams, *, attacked: bool, detected: bool, prevented: bool) -> float:
        """Credit one read interaction to ``server``; returns the server's realized utility."""
        tally = self.servers.setdefault(server, ServerTally())
        tally.interactions += 1
        if not attacked:
            self.client_utility += payoffs.g_c
            return 0.0
        tally.attacks += 1
        if detected:
            tally.detected += 1
            tally.utility -= payoffs.d_s
            self.client_utility += payoffs.d_c
            return -payoffs.d_s
        if prevented:
            tally.prevented += 1
            tally.utility += payoffs.g_s
            self.client_utility -= payoffs.g_c
            return payoffs.g_s
        self.client_utility += payoffs.g_c
        return 0.0

    def average_utility(self, server: str) -> float:
        tally = self.servers.get(server)
        if tally is None or tally.interactions == 0:
            return 0.0
        return tally.utility / tally.interactions


def settle_reads(trace: Trace, reads: Iterable[ReadInteraction], profiles: dict[str, ServerProfile]) -> PayoffLedger:
    """Ledger over every malicious server and every completed read of ``trace``.

    A server attacked a read if it sent a corrupted message while the read
    was running; it was detected if that read's client detected it.
    """
    corrupt_ticks: dict[str, list[int]] = {}
    for record in trace.of_kind(CORRUPT):
        corrupt_ticks.setdefault(record.sender, []).append(record.tick)
    detections: defaultdict[int | None, set[str]] = defaultdict(set)
    for record in trace.of_kind(DETECT):
        detections[(record.data or {}).get("op_id")].add(record.recipient)

    ledger = PayoffLedger()
    malicious = {sid: p for sid, p in profiles.items() if p.is_malicious}
    for read in reads:
        caught = detections.get(read.op_id, set())
        for sid, profile in malicious.items():
            attacked = any(read.t_b <= tick <= read.t_e for tick in corrupt_ticks.get(sid, ()))
            ledger.record_payoff(sid, profile.payoffs, attacked=attacked, detected=sid in caught, prevented=read.prevented)
    return ledger
