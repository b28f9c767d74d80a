"""Scenario documents: what to simulate and how to check it.

Scenarios are TOML or JSON documents validated into pydantic models. Every
CLI flag has a field here; the CLI overrides the document.
"""

import json
import tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .adversary.profiles import CorruptionAction, MessageTarget, ProfileKind, RequestKind, ScriptRule, ServerProfile
from .checker.verdict import ALL_CHECKS, CheckName
from .errors import InvalidParameterError, ModelViolationError, ScenarioError
from .game.payoffs import Belief, PayoffParams
from .register.messages import FORGED_PREFIX
from .register.state import ProtocolKind
from .simnet.timing import DelayPolicy, TimingParams
from .variants.fingerprint import FingerprintKind

SCENARIO_SCHEMA = "ratreg.scenario/1"


class TimingModel(BaseModel):
    delta: int = Field(10, ge=1, description="Broadcast delay bound")
    delta_prime: int = Field(5, ge=1, description="Anonymous channel delay bound")
    worst_case: bool = Field(False, description="Every delay equals its bound")

    def params(self) -> TimingParams:
        return TimingParams(self.delta, self.delta_prime)

    @property
    def policy(self) -> DelayPolicy:
        return DelayPolicy.WORST_CASE if self.worst_case else DelayPolicy.UNIFORM


class PayoffModel(BaseModel):
    g_c: float = Field(1.0, gt=0)
    d_c: float = Field(1.0, gt=0)
    g_s: float = Field(1.0, gt=0)
    d_s: float = Field(1.0, gt=0)

    def params(self) -> PayoffParams:
        return PayoffParams(self.g_c, self.d_c, self.g_s, self.d_s)


class RuleModel(BaseModel):
    action: CorruptionAction
    target: MessageTarget = MessageTarget.REPLY
    request: RequestKind = RequestKind.ANY
    from_tick: int = Field(0, ge=0)
    until_tick: int | None = Field(None, ge=0)
    every: int = Field(1, ge=1)
    probability: float = Field(1.0, ge=0.0, le=1.0)
    delta: int | None = Field(None, description="Fixed timestamp shift; drawn from {-2,-1,1,2} when absent")

    def rule(self) -> ScriptRule:
        return ScriptRule(**self.model_dump())


class ProfileModel(BaseModel):
    server: int = Field(..., ge=1, description="1-based server index")
    kind: ProfileKind
    crash_at: int | None = Field(None, ge=0)
    rules: list[RuleModel] = Field(default_factory=list)
    theta: float | None = Field(None, ge=0.0, le=1.0, description="Belief that a request is risky")
    clients: int | None = Field(None, ge=1, description="Estimated client count; theta = 1/clients")
    payoffs: PayoffModel = Field(default_factory=PayoffModel)
    action: CorruptionAction = CorruptionAction.WRONG_VALUE

    def profile(self) -> ServerProfile:
        if self.kind is ProfileKind.CRASH:
            assert self.crash_at is not None
            return ServerProfile.crash(self.crash_at)
        if self.kind is ProfileKind.SCRIPTED:
            return ServerProfile.scripted(*(r.rule() for r in self.rules))
        if self.kind is ProfileKind.RATIONAL:
            belief = Belief(self.theta) if self.theta is not None else Belief.from_client_count(self.clients or 1)
            return ServerProfile.rational(belief, self.payoffs.params(), self.action)
        return ServerProfile.honest()

    @model_validator(mode="after")
    def _fields_match_kind(self) -> "ProfileModel":
        if self.kind is ProfileKind.CRASH and self.crash_at is None:
            raise ValueError(f"server {self.server}: crash profile needs crash_at")
        if self.kind is ProfileKind.RATIONAL and self.theta is None and self.clients is None:
            raise ValueError(f"server {self.server}: rational profile needs theta or clients")
        if self.kind is ProfileKind.SCRIPTED and not self.rules:
            raise ValueError(f"server {self.server}: scripted profile needs at least one rule")
        return self


class OperationModel(BaseModel):
    client: int = Field(..., ge=1, description="1-based client index")
    op: Literal["read", "write"]
    value: int | str | None = None
    at: int = Field(..., ge=0, description="Invocation tick")


class GeneratorModel(BaseModel):
    writes: int = Field(3, ge=0)
    reads_per_client: int = Field(3, ge=0)
    writer: int = Field(1, ge=1)


class Scenario(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    schema_: Literal["ratreg.scenario/1"] = Field(SCENARIO_SCHEMA, alias="schema")
    name: str = "scenario"
    protocol: ProtocolKind = ProtocolKind.P
    n_servers: int = Field(3, ge=1)
    n_clients: int = Field(2, ge=1)
    timing: TimingModel = Field(default_factory=TimingModel)
    profiles: list[ProfileModel] = Field(default_factory=list)
    workload: list[OperationModel] | None = None
    generator: GeneratorModel | None = None
    client_crashes: dict[int, int] = Field(default_factory=dict, description="client index -> crash tick")
    coin_p: float = Field(0.5, ge=0.0, le=1.0)
    fingerprint: FingerprintKind = FingerprintKind.SHA256
    seed: int = 0
    runs: int = Field(1, ge=1)
    output_dir: str | None = None
    checks: list[CheckName] = Field(default_factory=lambda: list(ALL_CHECKS))

    # -- derived views ----------------------------------------------------

    @property
    def server_ids(self) -> list[str]:
        return [f"s{i}" for i in range(1, self.n_servers + 1)]

    @property
    def client_ids(self) -> list[str]:
        return [f"c{i}" for i in range(1, self.n_clients + 1)]

    def timing_params(self) -> TimingParams:
        return self.timing.params()

    def profile_map(self) -> dict[str, ServerProfile]:
        profiles = {sid: ServerProfile.honest() for sid in self.server_ids}
        for model in self.profiles:
            profiles[f"s{model.server}"] = model.profile()
        return profiles

    @property
    def write_duration(self) -> int:
        return 3 * self.timing.delta

    @property
    def max_read_duration(self) -> int:
        extra = 2 * self.timing.delta_prime if self.protocol is ProtocolKind.PCV else 0
        return 3 * self.timing.delta + extra

    def max_duration(self, op: str) -> int:
        return self.write_duration if op == "write" else self.max_read_duration

    # -- validation -------------------------------------------------------

    @model_validator(mode="after")
    def _check_model(self) -> "Scenario":
        if self.timing.delta_prime > self.timing.delta:
            raise ValueError(f"timing: delta_prime ({self.timing.delta_prime}) must not exceed delta ({self.timing.delta})")
        seen: set[int] = set()
        for model in self.profiles:
            if model.server > self.n_servers:
                raise ValueError(f"profile for server {model.server} but only {self.n_servers} servers")
            if model.server in seen:
                raise ValueError(f"two profiles for server {model.server}")
            seen.add(model.server)
        honest_alive = self.n_servers - len([m for m in self.profiles if m.kind is not ProfileKind.HONEST])
        if honest_alive < 1:
            raise ValueError("no honest alive server: at least one server must be honest and never crash")
        for index in self.client_crashes:
            if not 1 <= index <= self.n_clients:
                raise ValueError(f"client_crashes names client {index} but only {self.n_clients} clients")
        if self.generator is not None and self.generator.writer > self.n_clients:
            raise ValueError(f"generator writer {self.generator.writer} exceeds {self.n_clients} clients")
        if self.workload is not None:
            self._check_workload(self.workload)
        return self

    def _check_workload(self, workload: list[OperationModel]) -> None:
        for op in workload:
            if op.client > self.n_clients:
                raise ValueError(f"workload names client {op.client} but only {self.n_clients} clients")
            if op.op == "write":
                if op.value is None:
                    raise ValueError(f"write at tick {op.at} has no value")
                if isinstance(op.value, str) and op.value.startswith(FORGED_PREFIX):
                    raise ValueError(f"written values may not start with {FORGED_PREFIX!r}")
        writes = sorted((op for op in workload if op.op == "write"), key=lambda op: op.at)
        for first, second in zip(writes, writes[1:], strict=False):
            if second.at < first.at + self.write_duration:
                raise ValueError(f"overlapping writes: write at tick {second.at} starts before the write at tick {first.at} ends")
        by_client: dict[int, list[OperationModel]] = {}
        for op in workload:
            by_client.setdefault(op.client, []).append(op)
        for client, ops in by_client.items():
            ops.sort(key=lambda op: op.at)
            for first, second in zip(ops, ops[1:], strict=False):
                if second.at <= first.at + self.max_duration(first.op):
                    raise ValueError(f"client {client} invokes an operation at tick {second.at} while its {first.op} from tick {first.at} may still run")

    def with_overrides(self, **overrides: Any) -> "Scenario":
        """Re-validated copy with the given fields replaced; ``None`` values are ignored."""
        data = self.model_dump(mode="json", by_alias=True)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return validate_scenario(data)


def validate_scenario(data: dict[str, Any]) -> Scenario:
    protocol = data.get("protocol", ProtocolKind.P.value)
    if not isinstance(protocol, ProtocolKind) and protocol not in {p.value for p in ProtocolKind}:
        raise ScenarioError(f"unknown protocol tag {protocol!r}; expected one of p, pcv, phash")
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(map(str, err['loc'])) or 'scenario'}: {err['msg']}" for err in e.errors())
        raise ScenarioError(f"invalid scenario: {problems}") from e
    except (InvalidParameterError, ModelViolationError) as e:
        raise ScenarioError(f"invalid scenario: {e}") from e


def parse_scenario(text: str, fmt: Literal["toml", "json"] = "toml") -> Scenario:
    """Parse and validate a scenario document."""
    try:
        data = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        raise ScenarioError(f"scenario is not valid {fmt.upper()}: {e}") from e
    return validate_scenario(data)


def load_scenario(path: Path) -> Scenario:
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    fmt: Literal["toml", "json"] = "json" if path.suffix.lower() == ".json" else "toml"
    return parse_scenario(path.read_text(), fmt)
