"""Event log of a simulated run.

Records serialise to line-delimited JSON with a fixed field order so that two
traces of the same (scenario, seed) diff cleanly.
"""

import json
from collections import Counter
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

TRACE_SCHEMA = "ratreg.trace/1"

# Record kinds emitted by the engine and the automata.
SEND = "send"
DELIVER = "deliver"
TIMER = "timer"
DETECT = "detect"
OP_INVOKE = "op_invoke"
OP_RETURN = "op_return"
CRASH = "crash"
SNAPSHOT = "snapshot"
STRATEGY = "strategy"
CORRUPT = "corrupt"
COIN = "coin"
FINGERPRINT = "fingerprint"
DETECTION_RUN = "detection_run"
WARNING = "warning"
NOTE = "note"


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One line of the trace."""

    tick: int
    kind: str
    sender: str
    recipient: str
    payload: str
    data: dict[str, Any] | None = None

    @property
    def message_kind(self) -> str:
        """Message tag of a send/deliver payload summary, e.g. ``REPLY``."""
        return self.payload.split("(", 1)[0]

    def to_dict(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "tick": self.tick,
            "kind": self.kind,
            "sender": self.sender,
            "recipient": self.recipient,
            "payload": self.payload,
        }
        if self.data is not None:
            record["data"] = self.data
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=False, default=_encode)


def _encode(value: Any) -> Any:
    if isinstance(value, (set, frozenset)):
        return sorted(value, key=lambda v: (type(v).__name__, str(v)))
    if isinstance(value, bytes):
        return value.hex()
    raise TypeError(f"cannot serialise {type(value).__name__} in a trace record")


@dataclass
class Trace:
    """Accumulated records of one run."""

    records: list[TraceRecord] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def add(self, tick: int, kind: str, sender: str = "", recipient: str = "", payload: str = "", data: dict[str, Any] | None = None) -> None:
        self.records.append(TraceRecord(tick, kind, sender, recipient, payload, data))

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def of_kind(self, *kinds: str) -> list[TraceRecord]:
        """Records whose kind is one of ``kinds``, in trace order."""
        wanted = set(kinds)
        return [r for r in self.records if r.kind in wanted]

    def kind_counts(self) -> Counter[str]:
        return Counter(r.kind for r in self.records)

    def to_jsonl(self) -> str:
        """Schema header line followed by one JSON object per record."""
        header = json.dumps({"schema": TRACE_SCHEMA, "meta": self.meta}, separators=(",", ":"), default=_encode)
        return "\n".join([header, *(r.to_json() for r in self.records)]) + "\n"

    def write(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str | Iterable[str]) -> "Trace":
        lines = text.splitlines() if isinstance(text, str) else list(text)
        lines = [line for line in lines if line.strip()]
        if not lines:
            return cls()
        header = json.loads(lines[0])
        if header.get("schema") != TRACE_SCHEMA:
            raise ValueError(f"unsupported trace schema: {header.get('schema')!r}")
        trace = cls(meta=header.get("meta", {}))
        for line in lines[1:]:
            raw = json.loads(line)
            trace.records.append(
                TraceRecord(
                    tick=raw["tick"],
                    kind=raw["kind"],
                    sender=raw["sender"],
                    recipient=raw["recipient"],
                    payload=raw["payload"],
                    data=raw.get("data"),
                )
            )
        return trace

    @classmethod
    def read(cls, path: Path) -> "Trace":
        return cls.from_jsonl(path.read_text())
