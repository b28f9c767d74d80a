"""Post-hoc checks over a trace and its operation history."""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any

from ..adversary.profiles import ProfileKind, ServerProfile
from ..register.messages import server_index
from ..register.state import ProtocolKind
from ..simnet.timing import TimingParams
from ..simnet.trace import CORRUPT, CRASH, DETECT, DETECTION_RUN, SNAPSHOT, Trace
from .history import History, OperationRecord


@dataclass(frozen=True)
class Violation:
    check: str
    message: str
    op_id: int | None = None
    evidence: dict[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        prefix = f"op {self.op_id}: " if self.op_id is not None else ""
        return f"[{self.check}] {prefix}{self.message}"


def _returned(read: OperationRecord) -> Any:
    return None if read.outcome == "bottom" else read.value


# -- termination ----------------------------------------------------------


def allowed_read_durations(timing: TimingParams, protocol: ProtocolKind) -> set[int]:
    durations = {0, 2 * timing.delta, 3 * timing.delta}
    if protocol is ProtocolKind.PCV:
        durations.add(3 * timing.delta + 2 * timing.delta_prime)
    return durations


def check_termination(history: History, timing: TimingParams, protocol: ProtocolKind = ProtocolKind.P) -> list[Violation]:
    """Every operation of a non-crashed client returns, after one of the allowed durations."""
    violations = []
    read_durations = allowed_read_durations(timing, protocol)
    for op in history.records:
        if not op.complete:
            if op.invoker not in history.crashed:
                violations.append(Violation("termination", f"{op.op_kind} by {op.invoker} never returned", op.op_id))
            continue
        assert op.t_e is not None
        duration = op.t_e - op.t_b
        if op.is_write and duration != 3 * timing.delta:
            violations.append(Violation("termination", f"write took {duration} ticks, expected {3 * timing.delta}", op.op_id, {"duration": duration}))
        if op.is_read and duration not in read_durations:
            violations.append(
                Violation("termination", f"read took {duration} ticks, allowed {sorted(read_durations)}", op.op_id, {"duration": duration})
            )
    return violations


# -- validity -------------------------------------------------------------


@dataclass
class ValidityReport:
    violations: list[Violation] = field(default_factory=list)
    aborts: list[int] = field(default_factory=list)
    checked: int = 0

    @property
    def invalid_reads(self) -> set[int]:
        return {v.op_id for v in self.violations if v.op_id is not None}


def admissible_values(history: History, read: OperationRecord) -> list[Any]:
    """Value of the last write preceding ``read`` plus values of writes concurrent with it."""
    writes = history.writes_with_initial()
    preceding = [w for w in writes if w.precedes(read)]
    last = max(preceding, key=lambda w: (w.t_b, w.op_id))
    concurrent = [w for w in writes if w.concurrent_with(read)]
    values = [last.value]
    for w in concurrent:
        if w.value not in values:
            values.append(w.value)
    return values


def check_validity(history: History) -> ValidityReport:
    """Reads that returned a value must return an admissible one; aborts are listed apart."""
    report = ValidityReport()
    for read in history.reads():
        if not read.complete:
            continue
        if read.outcome == "abort":
            report.aborts.append(read.op_id)
            continue
        report.checked += 1
        returned = _returned(read)
        admissible = admissible_values(history, read)
        if returned not in admissible:
            report.violations.append(
                Violation("validity", f"read returned {returned!r}, admissible {admissible!r}", read.op_id, {"returned": returned, "admissible": admissible})
            )
    return report


def validity_oracle(history: History) -> set[int]:
    """Invalid reads found by enumerating write pairs directly from the raw times.

    A write is admissible for a read when it starts before the read ends and
    no other write lies entirely between it and the read.
    """
    writes = history.writes_with_initial()
    invalid = set()
    for read in history.reads():
        if read.t_e is None or read.outcome == "abort":
            continue
        admissible = set()
        for w in writes:
            if w.t_b > read.t_e:
                continue
            shadowed = any(
                w.t_e is not None and other.t_e is not None and w.t_e < other.t_b and other.t_e < read.t_b for other in writes if other is not w
            )
            if not shadowed:
                admissible.add(repr(w.value))
        if repr(_returned(read)) not in admissible:
            invalid.add(read.op_id)
    return invalid


# -- detection accuracy ---------------------------------------------------


@dataclass
class DetectionReport:
    detections: int = 0
    false_positives: list[Violation] = field(default_factory=list)
    crash_detections: list[str] = field(default_factory=list)
    missed: list[Violation] = field(default_factory=list)
    detected_servers: set[str] = field(default_factory=set)


def _expected_from_run(run: dict[str, Any]) -> set[str]:
    """Servers a detection run must catch, judged server by server."""
    entries: dict[str, list[list[Any]]] = defaultdict(list)
    for entry in run["entries"]:
        entries[entry[0]].append(entry)
    last_ts, my_last_ts, my_last_val = run["last_ts"], run["my_last_ts"], run["my_last_val"]
    expected = set()
    for sid in run["honest"]:
        mine = entries.get(sid, [])
        if not mine:
            expected.add(sid)
        elif run["set_type"] == "A":
            if any(ts != my_last_ts or (run["my_fingerprint"] and fp != run["my_fingerprint"]) for _, ts, fp in mine):
                expected.add(sid)
        elif run["writing"]:
            if not any(ts == my_last_ts and vals is not None and my_last_val in vals for _, ts, vals in mine):
                expected.add(sid)
        else:
            too_old = run["freshest"].get(sid, 0) < last_ts - 1
            too_new = any(ts > last_ts + 1 for _, ts, _ in mine)
            wrong = (
                my_last_val is not None
                and my_last_ts == last_ts
                and any(ts == my_last_ts and (vals is None or my_last_val not in vals) for _, ts, vals in mine)
            )
            if too_old or too_new or wrong:
                expected.add(sid)
    return expected


def check_detection_accuracy(trace: Trace, profiles: dict[str, ServerProfile]) -> DetectionReport:
    """Soundness (hard failures) and completeness of detection runs (informational)."""
    report = DetectionReport()
    first_deviation: dict[str, int] = {}
    for record in trace.of_kind(CORRUPT):
        first_deviation.setdefault(record.sender, record.tick)
    crashed = {r.sender: r.tick for r in trace.of_kind(CRASH)}

    caught_by_op: dict[tuple[str, Any], set[str]] = defaultdict(set)
    for record in trace.of_kind(DETECT):
        report.detections += 1
        sid = record.recipient
        report.detected_servers.add(sid)
        op_id = (record.data or {}).get("op_id")
        caught_by_op[(record.sender, op_id)].add(sid)
        profile = profiles.get(sid, ServerProfile.honest())
        if profile.kind is ProfileKind.CRASH and sid in crashed and crashed[sid] <= record.tick:
            report.crash_detections.append(sid)
            continue
        if profile.is_malicious and first_deviation.get(sid, record.tick + 1) <= record.tick:
            continue
        kind = "honest" if profile.kind is ProfileKind.HONEST else f"{profile.kind.value} server without a prior deviation"
        report.false_positives.append(
            Violation("detection", f"{record.sender} detected {kind} {sid} ({record.payload}) at tick {record.tick}", op_id, {"server": sid})
        )

    for record in trace.of_kind(DETECTION_RUN):
        run = record.data or {}
        expected = _expected_from_run(run)
        missing = expected - caught_by_op[(record.sender, run.get("op_id"))]
        for sid in sorted(missing, key=server_index):
            report.missed.append(Violation("detection-completeness", f"{record.sender} did not detect {sid} at tick {record.tick}", run.get("op_id")))
    return report


# -- timestamp rules -----------------------------------------------------


def _deviated_between(trace: Trace, t_b: int, t_e: int) -> set[str]:
    return {r.sender for r in trace.of_kind(CORRUPT) if t_b <= r.tick <= t_e}


def check_timestamp_rules(trace: Trace, history: History | None = None, profiles: dict[str, ServerProfile] | None = None) -> list[Violation]:
    """Monotonic write timestamps, +1 steps, last_ts agreement and effective writes."""
    history = history or History.from_trace(trace)
    profiles = profiles or {}
    violations: list[Violation] = []
    writes = history.writes()

    previous: OperationRecord | None = None
    for w in writes:
        if not w.complete:
            previous = None
            continue
        if previous is not None and previous.ts is not None and w.ts is not None:
            if w.ts <= previous.ts:
                violations.append(Violation("ts-monotonic", f"write ts {w.ts} not above previous {previous.ts}", w.op_id))
            elif w.ts != previous.ts + 1:
                violations.append(Violation("ts-increment", f"write ts {w.ts} follows {previous.ts}", w.op_id))
        previous = w

    snapshots = {(r.data or {}).get("op_id"): r.data or {} for r in trace.of_kind(SNAPSHOT)}
    for w in writes:
        snap = snapshots.get(w.op_id)
        if not w.complete or snap is None:
            continue
        assert w.t_e is not None
        last_ts = {cid: state["last_ts"] for cid, state in snap.get("clients", {}).items()}
        if len(set(last_ts.values())) > 1 or any(ts != w.ts for ts in last_ts.values()):
            violations.append(Violation("last-ts-agreement", f"clients disagree at write end: {last_ts}", w.op_id, {"last_ts": last_ts}))
        deviated = _deviated_between(trace, w.t_b, w.t_e)
        for sid, state in snap.get("servers", {}).items():
            profile = profiles.get(sid, ServerProfile.honest())
            if profile.is_malicious and sid in deviated:
                continue
            if w.value not in state["val"]:
                violations.append(Violation("effective-write", f"{sid} does not hold {w.value!r} at write end", w.op_id, {"server": sid}))
    return violations
