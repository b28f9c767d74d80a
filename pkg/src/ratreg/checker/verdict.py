"""Verdict document: every check of one run in a stable machine-readable layout."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..adversary.profiles import ServerProfile
from ..register.state import ProtocolKind
from ..simnet.timing import TimingParams
from ..simnet.trace import CORRUPT, Trace
from .checks import check_detection_accuracy, check_termination, check_timestamp_rules, check_validity, validity_oracle
from .costs import CostReport, cost_report
from .history import History

VERDICT_SCHEMA = "ratreg.verdict/1"

CheckName = Literal["termination", "validity", "detection", "timestamps"]
ALL_CHECKS: tuple[CheckName, ...] = ("termination", "validity", "detection", "timestamps")


class CheckResult(BaseModel):
    name: str
    passed: bool
    violations: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)


class Verdict(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_: str = Field(default=VERDICT_SCHEMA, alias="schema")
    scenario: str = ""
    protocol: ProtocolKind = ProtocolKind.P
    seed: int = 0
    passed: bool = True
    checks: list[CheckResult] = Field(default_factory=list)
    reads: int = 0
    writes: int = 0
    aborts: int = 0
    invalid_reads: list[int] = Field(default_factory=list)
    detections: int = 0
    detected_servers: list[str] = Field(default_factory=list)
    false_positives: int = 0
    crash_detections: int = 0
    missed_detections: int = 0
    corrupted_messages: int = 0
    cost: CostReport = Field(default_factory=CostReport)

    def check(self, name: str) -> CheckResult | None:
        return next((c for c in self.checks if c.name == name), None)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


def evaluate(
    trace: Trace,
    *,
    timing: TimingParams,
    protocol: ProtocolKind,
    profiles: dict[str, ServerProfile],
    scenario: str = "",
    seed: int = 0,
    checks: tuple[str, ...] = ALL_CHECKS,
) -> Verdict:
    """Run the enabled checks over ``trace``."""
    history = History.from_trace(trace)
    validity = check_validity(history)
    detection = check_detection_accuracy(trace, profiles)
    verdict = Verdict(
        scenario=scenario,
        protocol=protocol,
        seed=seed,
        reads=len(history.reads()),
        writes=len(history.writes()),
        aborts=len(validity.aborts),
        invalid_reads=sorted(validity.invalid_reads),
        detections=detection.detections,
        detected_servers=sorted(detection.detected_servers),
        false_positives=len(detection.false_positives),
        crash_detections=len(detection.crash_detections),
        missed_detections=len(detection.missed),
        corrupted_messages=len(trace.of_kind(CORRUPT)),
        cost=cost_report(trace),
    )

    if "termination" in checks:
        found = check_termination(history, timing, protocol)
        verdict.checks.append(CheckResult(name="termination", passed=not found, violations=[str(v) for v in found]))
    if "validity" in checks:
        notes = [f"{len(validity.aborts)} aborted reads (terminating, not judged)"] if validity.aborts else []
        oracle = validity_oracle(history)
        if oracle != validity.invalid_reads:
            notes.append(f"oracle disagrees: checker {sorted(validity.invalid_reads)} oracle {sorted(oracle)}")
        verdict.checks.append(CheckResult(name="validity", passed=not validity.violations, violations=[str(v) for v in validity.violations], notes=notes))
    if "detection" in checks:
        notes = [str(v) for v in detection.missed]
        if detection.crash_detections:
            notes.append(f"crash detections: {', '.join(detection.crash_detections)}")
        verdict.checks.append(
            CheckResult(name="detection", passed=not detection.false_positives, violations=[str(v) for v in detection.false_positives], notes=notes)
        )
    if "timestamps" in checks:
        found = check_timestamp_rules(trace, history, profiles)
        verdict.checks.append(CheckResult(name="timestamps", passed=not found, violations=[str(v) for v in found]))
    verdict.passed = all(c.passed for c in verdict.checks)
    return verdict
