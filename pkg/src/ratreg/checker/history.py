"""Operation-level view of a trace."""

from dataclasses import dataclass, field
from typing import Any

from ..simnet.trace import CRASH, OP_INVOKE, OP_RETURN, Trace

# The initial value is written by a fictional write that ends before time 0.
INITIAL_WRITE_ID = -1


@dataclass(frozen=True)
class OperationRecord:
    op_id: int
    op_kind: str
    invoker: str
    t_b: int
    t_e: int | None = None
    value: Any = None  # written value, or the value a read returned
    outcome: str | None = None  # value | bottom | abort | ok; None while failed
    ts: int | None = None

    @property
    def complete(self) -> bool:
        return self.t_e is not None

    @property
    def is_read(self) -> bool:
        return self.op_kind == "read"

    @property
    def is_write(self) -> bool:
        return self.op_kind == "write"

    def precedes(self, other: "OperationRecord") -> bool:
        return self.t_e is not None and self.t_e < other.t_b

    def concurrent_with(self, other: "OperationRecord") -> bool:
        return not self.precedes(other) and not other.precedes(self)


@dataclass
class History:
    records: list[OperationRecord] = field(default_factory=list)
    crashed: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_trace(cls, trace: Trace) -> "History":
        invoked: dict[int, dict[str, Any]] = {}
        returned: dict[int, dict[str, Any]] = {}
        crashed: dict[str, int] = {}
        for record in trace:
            if record.kind == OP_INVOKE and record.data is not None:
                invoked[record.data["op_id"]] = {"tick": record.tick, "invoker": record.sender, **record.data}
            elif record.kind == OP_RETURN and record.data is not None:
                returned[record.data["op_id"]] = {"tick": record.tick, **record.data}
            elif record.kind == CRASH:
                crashed.setdefault(record.sender, record.tick)
        records = []
        for op_id in sorted(invoked):
            inv = invoked[op_id]
            ret = returned.get(op_id)
            value = inv.get("value") if inv["op"] == "write" else (ret or {}).get("value")
            records.append(
                OperationRecord(
                    op_id=op_id,
                    op_kind=inv["op"],
                    invoker=inv["invoker"],
                    t_b=inv["tick"],
                    t_e=ret["tick"] if ret else None,
                    value=value,
                    outcome=ret["outcome"] if ret else None,
                    ts=ret.get("ts") if ret else None,
                )
            )
        return cls(records=records, crashed=crashed)

    def reads(self) -> list[OperationRecord]:
        return [r for r in self.records if r.is_read]

    def writes(self) -> list[OperationRecord]:
        return sorted((r for r in self.records if r.is_write), key=lambda r: (r.t_b, r.op_id))

    def writes_with_initial(self) -> list[OperationRecord]:
        initial = OperationRecord(INITIAL_WRITE_ID, "write", "", t_b=-1, t_e=-1, value=None, outcome="ok", ts=0)
        return [initial, *self.writes()]

    def by_id(self, op_id: int) -> OperationRecord | None:
        return next((r for r in self.records if r.op_id == op_id), None)
