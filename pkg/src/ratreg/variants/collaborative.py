"""Collaborative detection: readers ask writers to vouch for the value they wrote.

After protocol P's checks fail, the reader flips the coin. On heads it sends
``CHECK_TS`` with the timestamps of the replies it holds to every client and
waits ``2 * delta_prime``. Every client that wrote one of those timestamps, or
a later one, answers with its last written pair.

Only the replies held when ``CHECK_TS`` left are judged. The target is the
highest timestamp an honest-set server reported among them:

- a witness for the target settles the read on the witnessed value;
- a server claiming an unwitnessed target it never acknowledged is detected,
  and the next highest timestamp becomes the target;
- an unwitnessed target that its server did acknowledge was really written,
  by a writer that no longer answers, so the read aborts;
- a target of 0 means nothing was written yet and the read returns bottom.

At every witnessed timestamp, servers reporting another value are detected.
"""

from collections.abc import Generator, Iterable
from typing import Protocol

from ..register.detection import Detection, DetectionReason, by_server
from ..register.messages import CheckTs, RegisterValue, ServerId, Timestamp, server_index
from ..register.state import ClientState, ReadOutcome, ReplyTriple
from ..simnet.timing import TimingParams
from .coin import Coin


class WitnessPort(Protocol):
    """What the fallback needs from the reading client."""

    state: ClientState
    timing: TimingParams

    def record_coin(self, heads: bool) -> None: ...

    def open_witness_window(self, request: CheckTs) -> None: ...

    def close_witness_window(self) -> dict[Timestamp, RegisterValue]: ...

    def apply_detections(self, detections: list[Detection]) -> None: ...

    def note(self, text: str) -> None: ...


def should_vouch(state: ClientState, request: CheckTs) -> bool:
    """Whether this client answers a ``CHECK_TS`` request."""
    if state.my_last_val is None:
        return False
    return state.my_last_ts >= min(request.timestamps, default=0)


def witness_cross_check(state: ClientState, replies: Iterable[ReplyTriple], witnesses: dict[Timestamp, RegisterValue]) -> list[Detection]:
    """Honest-set servers reporting a witnessed timestamp with another value."""
    flagged: set[ServerId] = set()
    for j, ts, val in sorted(replies, key=lambda r: (server_index(r[0]), r[1], str(r[2]))):
        if j not in state.honest or ts not in witnesses:
            continue
        if val is None or witnesses[ts] not in val:
            flagged.add(j)
    return [Detection(j, DetectionReason.WITNESS_MISMATCH) for j in by_server(flagged)]


def cv_read_fallback(port: WitnessPort, coin: Coin) -> Generator[int, None, ReadOutcome]:
    """Runs after protocol P's read detection; yields the ticks to wait."""
    state = port.state
    heads = coin.flip()
    port.record_coin(heads)
    if not heads:
        pair = state.unanimous_pair()
        return ReadOutcome.from_pair(*pair) if pair else ReadOutcome.abort()

    judged = frozenset(state.replies)
    candidates = sorted({ts for (j, ts, _) in judged if j in state.honest})
    port.open_witness_window(CheckTs(tuple(candidates)))
    yield 2 * port.timing.delta_prime
    witnesses = port.close_witness_window()

    found = witness_cross_check(state, judged, witnesses)
    suspects = state.honest - {d.server for d in found}
    while True:
        reported = [(j, ts) for (j, ts, _) in judged if j in suspects]
        if not reported:
            break
        target = max(ts for _, ts in reported)
        if target == 0:
            port.apply_detections(found)
            return ReadOutcome.bottom()
        if target in witnesses:
            port.apply_detections(found)
            return ReadOutcome.of(witnesses[target], target)
        claimants = {j for j, ts in reported if ts == target}
        acknowledged = {j for j in claimants if (j, target) in state.acked}
        if acknowledged:
            break
        for j in by_server(claimants):
            found.append(Detection(j, DetectionReason.UNWITNESSED))
        suspects -= claimants
    port.apply_detections(found)
    port.note("witness-missing")
    return ReadOutcome.abort()
