"""Message and computation counts of a run."""

from collections import Counter

from pydantic import BaseModel, Field

from ..register.messages import NOTIFICATION_KINDS, PROTOCOL_KINDS
from ..simnet.trace import COIN, DETECTION_RUN, FINGERPRINT, SEND, Trace


class CostReport(BaseModel):
    """Counts under the accounting rule: every envelope is one message.

    A broadcast to n servers is n messages and a label send to c clients is c
    messages. ``messages_total`` covers protocol messages; DETECTED
    notifications are counted apart in ``notifications``.
    """

    messages_total: int = 0
    notifications: int = 0
    messages_by_kind: dict[str, int] = Field(default_factory=dict)
    check_messages: int = 0
    detection_runs: int = 0
    fingerprint_ops: int = 0
    coin_flips: int = 0
    coin_heads: int = 0


def cost_report(trace: Trace) -> CostReport:
    by_kind: Counter[str] = Counter()
    report = CostReport()
    for record in trace:
        if record.kind == SEND:
            by_kind[record.message_kind] += 1
        elif record.kind == DETECTION_RUN:
            report.detection_runs += 1
        elif record.kind == FINGERPRINT:
            report.fingerprint_ops += (record.data or {}).get("count", 0)
        elif record.kind == COIN:
            report.coin_flips += 1
            report.coin_heads += int(bool((record.data or {}).get("heads")))
    report.messages_by_kind = {kind: by_kind[kind] for kind in sorted(by_kind)}
    report.messages_total = sum(by_kind[kind] for kind in PROTOCOL_KINDS)
    report.notifications = sum(by_kind[kind] for kind in NOTIFICATION_KINDS)
    report.check_messages = by_kind["CHECK_TS"] + by_kind["CHECK_REPLY"]
    return report
