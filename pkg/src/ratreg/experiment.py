"""Seeded batches of runs and the protocol sweep."""

import logging
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import BaseModel, Field

from .adversary.profiles import CorruptionAction, MessageTarget, ProfileKind, RequestKind
from .checker.verdict import Verdict
from .my_logging import debug_log
from .register.state import ProtocolKind
from .run_history import RunHistory
from .scenario import OperationModel, ProfileModel, RuleModel, Scenario, validate_scenario
from .simnet.trace import Trace
from .simulation import Simulation

logger = logging.getLogger(__name__)


class ExperimentSummary(BaseModel):
    """Pass rates and cost statistics over a batch of seeds."""

    scenario: str
    protocol: ProtocolKind
    runs: int
    seeds: list[int] = Field(default_factory=list)
    passed: int = 0
    check_passes: dict[str, int] = Field(default_factory=dict)
    reads: int = 0
    aborts: int = 0
    invalid_reads: int = 0
    detections: int = 0
    false_positives: int = 0
    missed_detections: int = 0
    corrupted_messages: int = 0
    avg_messages: float = 0.0
    avg_notifications: float = 0.0
    avg_fingerprint_ops: float = 0.0
    coin_flips: int = 0
    coin_heads: int = 0

    @property
    def pass_rate(self) -> float:
        return self.passed / self.runs if self.runs else 0.0

    @property
    def coin_rate(self) -> float:
        return self.coin_heads / self.coin_flips if self.coin_flips else 0.0


@dataclass
class RunOutcome:
    seed: int
    verdict: Verdict
    trace: Trace | None = None
    duration_ms: float = 0.0


@dataclass
class ExperimentResult:
    summary: ExperimentSummary
    outcomes: list[RunOutcome] = field(default_factory=list)

    @property
    def verdicts(self) -> list[Verdict]:
        return [o.verdict for o in self.outcomes]


def _run_one(scenario: Scenario, seed: int, keep_trace: bool) -> RunOutcome:
    result = Simulation(scenario, seed).run()
    return RunOutcome(seed, result.verdict, result.trace if keep_trace else None, result.duration_ms)


def summarize(scenario: Scenario, outcomes: Iterable[RunOutcome]) -> ExperimentSummary:
    outcomes = list(outcomes)
    summary = ExperimentSummary(scenario=scenario.name, protocol=scenario.protocol, runs=len(outcomes))
    for outcome in outcomes:
        v = outcome.verdict
        summary.seeds.append(outcome.seed)
        summary.passed += int(v.passed)
        for check in v.checks:
            summary.check_passes[check.name] = summary.check_passes.get(check.name, 0) + int(check.passed)
        summary.reads += v.reads
        summary.aborts += v.aborts
        summary.invalid_reads += len(v.invalid_reads)
        summary.detections += v.detections
        summary.false_positives += v.false_positives
        summary.missed_detections += v.missed_detections
        summary.corrupted_messages += v.corrupted_messages
        summary.coin_flips += v.cost.coin_flips
        summary.coin_heads += v.cost.coin_heads
    if outcomes:
        n = len(outcomes)
        summary.avg_messages = sum(o.verdict.cost.messages_total for o in outcomes) / n
        summary.avg_notifications = sum(o.verdict.cost.notifications for o in outcomes) / n
        summary.avg_fingerprint_ops = sum(o.verdict.cost.fingerprint_ops for o in outcomes) / n
    return summary


def run_experiment(
    scenario: Scenario,
    runs: int | None = None,
    *,
    history: RunHistory | None = None,
    output_dir: Path | None = None,
    keep_traces: bool = False,
    workers: int = 1,
) -> ExperimentResult:
    """Run seeds ``seed, seed+1, ...`` and check every run.

    Worlds are independent, so ``workers > 1`` runs them in a process pool;
    results are ordered by seed either way. Engine livelocks propagate.
    """
    count = runs if runs is not None else scenario.runs
    seeds = [scenario.seed + i for i in range(count)]
    keep = keep_traces or output_dir is not None
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, [scenario] * count, seeds, [keep] * count))
    else:
        outcomes = [_run_one(scenario, seed, keep) for seed in seeds]

    for outcome in outcomes:
        if history is not None:
            history.record_run(outcome.verdict, outcome.duration_ms)
        if output_dir is not None:
            write_run(output_dir, scenario, outcome)
        if not keep_traces:
            outcome.trace = None

    summary = summarize(scenario, outcomes)
    debug_log("experiment finished", scenario=scenario.name, runs=count, passed=summary.passed)
    logger.info("experiment %s: %d/%d runs passed", scenario.name, summary.passed, count)
    return ExperimentResult(summary, outcomes)


def write_run(output_dir: Path, scenario: Scenario, outcome: RunOutcome) -> Path:
    """Write the trace and verdict of one run; returns the trace path."""
    output_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{scenario.name}-{scenario.protocol.value}-seed{outcome.seed}"
    trace_path = output_dir / f"{stem}.trace.jsonl"
    if outcome.trace is not None:
        outcome.trace.write(trace_path)
    (output_dir / f"{stem}.verdict.json").write_text(outcome.verdict.to_json() + "\n")
    return trace_path


# -- protocol sweep -------------------------------------------------------

SWEEP_SERVERS = 10
SWEEP_CLIENTS = 1000


def sweep_base(n_servers: int = SWEEP_SERVERS, n_clients: int = SWEEP_CLIENTS, delta: int = 10, delta_prime: int = 5) -> Scenario:
    """One write by c1 at tick 0 followed by one read by c2 once the write is over."""
    return validate_scenario(
        {
            "name": f"sweep-n{n_servers}-c{n_clients}",
            "n_servers": n_servers,
            "n_clients": n_clients,
            "timing": {"delta": delta, "delta_prime": delta_prime},
            "workload": [
                OperationModel(client=1, op="write", value=1, at=0).model_dump(mode="json"),
                OperationModel(client=min(2, n_clients), op="read", at=3 * delta + 1).model_dump(mode="json"),
            ],
        }
    )


def attack_variant(base: Scenario) -> Scenario:
    """``base`` with its last server shifting READ replies by +1 and a coin that always checks.

    The shifted reply passes the reading-side rules, so only a variant's extra
    check can catch it.
    """
    reads = [op.at for op in base.workload or [] if op.op == "read"]
    rule = RuleModel(
        action=CorruptionAction.WRONG_BOTH,
        target=MessageTarget.REPLY,
        request=RequestKind.READ,
        from_tick=min(reads, default=0),
        delta=1,
    )
    profiles = [p for p in base.profiles if p.server != base.n_servers]
    profiles.append(ProfileModel(server=base.n_servers, kind=ProfileKind.SCRIPTED, rules=[rule]))
    return base.with_overrides(name=f"{base.name}-attack", profiles=[p.model_dump(mode="json") for p in profiles], coin_p=1.0)


@dataclass(frozen=True)
class SweepPoint:
    protocol: ProtocolKind
    attacked: bool
    verdict: Verdict


def sweep(
    base: Scenario | None = None,
    protocols: Iterable[ProtocolKind] = (ProtocolKind.P, ProtocolKind.PCV, ProtocolKind.PHASH),
    *,
    with_attack: bool = True,
    seed: int | None = None,
) -> list[SweepPoint]:
    """Run ``base`` (and its attack variant) once under each protocol."""
    base = base or sweep_base()
    variants = [(False, base)]
    if with_attack:
        variants.append((True, attack_variant(base)))
    points = []
    for protocol in protocols:
        for attacked, scenario in variants:
            run = scenario.with_overrides(protocol=protocol.value)
            result = Simulation(run, seed).run()
            points.append(SweepPoint(protocol, attacked, result.verdict))
    return points
