"""One seeded world: build it from a scenario, run it, check it."""

import logging
import random
import time
from dataclasses import dataclass
from typing import Any

from .adversary.controller import behaviour_for
from .adversary.ledger import PayoffLedger, ReadInteraction, settle_reads
from .adversary.profiles import ProfileKind
from .checker.history import History
from .checker.verdict import Verdict, evaluate
from .config import RatregSettings
from .my_logging import debug_log
from .register.client import ClientProcess, Operation
from .register.server import ServerProcess
from .register.state import ReadOutcome
from .scenario import Scenario
from .simnet.engine import Envelope, Network
from .simnet.trace import NOTE, SNAPSHOT, Trace
from .variants.coin import Coin
from .workload import PlannedOp, child_rng, horizon, plan_workload

logger = logging.getLogger(__name__)

DRIVER_ID = "workload"


class WorkloadDriver:
    """Invokes the planned operations at their ticks."""

    def __init__(self, net: Network, clients: dict[str, ClientProcess], ops: list[PlannedOp]) -> None:
        self.pid = DRIVER_ID
        self.net = net
        self.clients = clients
        self.ops = {str(op.op_id): op for op in ops}
        for op in ops:
            net.set_timer(self.pid, op.at, str(op.op_id))

    def on_timer(self, tag: str) -> None:
        op = self.ops[tag]
        client = self.clients[op.client]
        if not self.net.is_alive(client.pid):
            self.net.trace.add(self.net.now, NOTE, client.pid, "", "skipped-crashed", {"op_id": op.op_id, "op": op.op})
            return
        if op.op == "write":
            assert op.value is not None
            client.invoke_write(op.op_id, op.value)
        else:
            client.invoke_read(op.op_id)

    def on_deliver(self, envelope: Envelope) -> None:  # noqa: ARG002
        pass


@dataclass
class SimulationResult:
    """Result of one simulated run."""

    scenario: Scenario
    seed: int
    trace: Trace
    history: History
    verdict: Verdict
    ledger: PayoffLedger
    duration_ms: float = 0.0


class Simulation:
    """Builds and runs the world described by a scenario for one seed."""

    def __init__(self, scenario: Scenario, seed: int | None = None, settings: RatregSettings | None = None) -> None:
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.settings = settings or RatregSettings.from_env()
        self.profiles = scenario.profile_map()
        self.net: Network | None = None
        self.servers: dict[str, ServerProcess] = {}
        self.clients: dict[str, ClientProcess] = {}
        self.ops: list[PlannedOp] = []

    def build(self) -> Network:
        """Wire servers, clients, crash schedules and the workload driver."""
        scenario = self.scenario
        trace = Trace(meta={"scenario": scenario.model_dump(mode="json", by_alias=True), "seed": self.seed})
        net = Network(
            scenario.timing_params(),
            random.Random(self.seed),
            scenario.timing.policy,
            trace,
            self.settings.max_events_per_tick,
        )
        for index, sid in enumerate(scenario.server_ids, start=1):
            profile = self.profiles[sid]
            server = ServerProcess(sid, net, behaviour_for(sid, profile, child_rng(self.seed, index)))
            net.add_server(server)
            self.servers[sid] = server
            if profile.kind is ProfileKind.CRASH:
                assert profile.crash_at is not None
                net.schedule_crash(sid, profile.crash_at)

        for index, cid in enumerate(scenario.client_ids, start=1):
            coin = Coin(scenario.coin_p, child_rng(self.seed, scenario.n_servers + index))
            client = ClientProcess(
                cid,
                net,
                scenario.server_ids,
                scenario.protocol,
                coin,
                scenario.fingerprint.fn,
                on_complete=self._snapshot,
            )
            net.add_client(client)
            self.clients[cid] = client
        for index, at in sorted(scenario.client_crashes.items()):
            net.schedule_crash(f"c{index}", at)

        self.ops = plan_workload(scenario, self.seed)
        net.add_process(WorkloadDriver(net, self.clients, self.ops))
        self.net = net
        return net

    def _snapshot(self, client: ClientProcess, op: Operation, outcome: ReadOutcome) -> None:
        net = client.net
        data: dict[str, Any] = {
            "op_id": op.op_id,
            "clients": {cid: c.snapshot() for cid, c in self.clients.items() if net.is_alive(cid)},
            "servers": {sid: s.snapshot() for sid, s in self.servers.items() if net.is_alive(sid)},
        }
        net.trace.add(net.now, SNAPSHOT, client.pid, "", "", data)

    def run(self) -> SimulationResult:
        start = time.time()
        net = self.build()
        trace = net.run_until(horizon(self.scenario, self.ops))
        history = History.from_trace(trace)
        verdict = evaluate(
            trace,
            timing=net.timing,
            protocol=self.scenario.protocol,
            profiles=self.profiles,
            scenario=self.scenario.name,
            seed=self.seed,
            checks=tuple(self.scenario.checks),
        )
        invalid = set(verdict.invalid_reads)
        reads = [
            ReadInteraction(r.op_id, r.invoker, r.t_b, r.t_e, r.outcome == "abort" or r.op_id in invalid)
            for r in history.reads()
            if r.t_e is not None
        ]
        ledger = settle_reads(trace, reads, self.profiles)
        duration_ms = (time.time() - start) * 1000
        debug_log("simulation finished", scenario=self.scenario.name, seed=self.seed, passed=verdict.passed, records=len(trace))
        logger.info("run %s seed=%d passed=%s", self.scenario.name, self.seed, verdict.passed)
        return SimulationResult(self.scenario, self.seed, trace, history, verdict, ledger, duration_ms)


def simulate(scenario: Scenario, seed: int | None = None) -> SimulationResult:
    return Simulation(scenario, seed).run()
