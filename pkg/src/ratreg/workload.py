"""Workloads: the operations a run invokes, and when."""

import random
from dataclasses import dataclass

from .scenario import GeneratorModel, Scenario

WORKLOAD_STREAM = 0


@dataclass(frozen=True)
class PlannedOp:
    op_id: int
    client: str
    op: str  # "read" | "write"
    value: int | str | None
    at: int


def child_rng(seed: int, index: int) -> random.Random:
    """Independent stream ``index`` of a world seeded with ``seed``."""
    return random.Random(seed * 1_000_003 + index)


def plan_workload(scenario: Scenario, seed: int) -> list[PlannedOp]:
    """Explicit workload of the scenario, else the generated one; sorted by tick."""
    if scenario.workload is not None:
        ops = [(f"c{op.client}", op.op, op.value, op.at) for op in scenario.workload]
    else:
        ops = generate_workload(scenario, scenario.generator or GeneratorModel(), child_rng(seed, WORKLOAD_STREAM))
    ops.sort(key=lambda op: (op[3], op[0]))
    return [PlannedOp(op_id, client, kind, value, at) for op_id, (client, kind, value, at) in enumerate(ops)]


def generate_workload(scenario: Scenario, generator: GeneratorModel, rng: random.Random) -> list[tuple[str, str, int | str | None, int]]:
    """One writer with sequential writes; every other client reads at seeded offsets.

    Writes are spaced by a random gap so reads land both inside and between
    write windows. With a single client it alternates writes and reads.
    """
    delta = scenario.timing.delta
    write_span = scenario.write_duration
    read_span = scenario.max_read_duration
    ops: list[tuple[str, str, int | str | None, int]] = []

    if scenario.n_clients == 1:
        tick = 0
        plan = _interleave(generator.writes, generator.reads_per_client)
        value = 0
        for kind in plan:
            if kind == "write":
                value += 1
                ops.append(("c1", "write", value, tick))
                tick += write_span + 1 + rng.randint(0, delta)
            else:
                ops.append(("c1", "read", None, tick))
                tick += read_span + 1 + rng.randint(0, delta)
        return ops

    writer = f"c{generator.writer}"
    tick = 0
    for value in range(1, generator.writes + 1):
        ops.append((writer, "write", value, tick))
        tick += write_span + 1 + rng.randint(0, delta)
    for cid in scenario.client_ids:
        if cid == writer:
            continue
        tick = rng.randint(0, write_span)
        for _ in range(generator.reads_per_client):
            ops.append((cid, "read", None, tick))
            tick += read_span + 1 + rng.randint(0, 2 * delta)
    return ops


def _interleave(writes: int, reads: int) -> list[str]:
    plan: list[str] = []
    while writes or reads:
        if writes:
            plan.append("write")
            writes -= 1
        if reads:
            plan.append("read")
            reads -= 1
    return plan


def horizon(scenario: Scenario, ops: list[PlannedOp]) -> int:
    """Tick by which every operation has returned and every message has landed."""
    if not ops:
        return 0
    last_end = max(op.at + scenario.max_duration(op.op) for op in ops)
    return last_end + scenario.timing.delta + scenario.timing.delta_prime
