"""Fingerprint variant: writes carry a digest that servers echo back."""

from dataclasses import dataclass, field, replace

from ..register.detection import Detection, DetectionReason, by_server
from ..register.messages import Timestamp, Write
from ..register.state import ClientState, ReplyTriple
from .coin import Coin
from .fingerprint import FingerprintFn

# Timestamps kept in a client's map of known fingerprints.
KNOWN_WINDOW = 2


def hash_write_decorate(msg: Write, fn: FingerprintFn) -> Write:
    return replace(msg, fingerprint=fn(msg.val, msg.ts))


def refresh_known(state: ClientState) -> None:
    """Adopt ``known[ts]`` once every honest server acked ts with one common digest."""
    for ts, by_sender in state.ack_fingerprints.items():
        if ts in state.known or not state.honest or not state.honest <= by_sender.keys():
            continue
        digests = {by_sender[sid] for sid in state.honest}
        if len(digests) == 1 and (digest := digests.pop()) is not None:
            state.known[ts] = digest
    for stale in sorted(state.known)[:-KNOWN_WINDOW]:
        del state.known[stale]
    floor = min(state.known, default=state.last_ts) - 1
    for stale in [ts for ts in state.ack_fingerprints if ts < floor]:
        del state.ack_fingerprints[stale]


@dataclass
class HashVerification:
    ran: bool
    detections: list[Detection] = field(default_factory=list)
    fingerprint_ops: int = 0


def hash_read_verify(state: ClientState, replies: set[ReplyTriple], coin: Coin, known: dict[Timestamp, bytes], fn: FingerprintFn) -> HashVerification:
    """On heads, recompute the digest of every honest-set reply whose timestamp is known."""
    if not coin.flip():
        return HashVerification(ran=False)
    result = HashVerification(ran=True)
    flagged: set[str] = set()
    for j, ts, val in sorted(replies, key=lambda r: (r[0], r[1], str(r[2]))):
        if j not in state.honest or j in flagged or ts not in known:
            continue
        matches = False
        for value in sorted(val or (), key=str):
            result.fingerprint_ops += 1
            if fn(value, ts) == known[ts]:
                matches = True
                break
        if not matches:
            flagged.add(j)
    result.detections = [Detection(j, DetectionReason.FINGERPRINT_MISMATCH) for j in by_server(flagged)]
    return result
