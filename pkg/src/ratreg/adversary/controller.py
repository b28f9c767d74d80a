"""Behaviours plugged into server processes.

Every deviation from the protocol is written to the trace as a ``corrupt``
record before the altered message leaves the server, so the checker can
attribute each detection to the deviation that caused it.
"""

import random
from dataclasses import replace
from typing import Any

from ..game.payoffs import Belief, PayoffParams, Strategy, best_response, expected_gain
from ..register.messages import FORGED_PREFIX, Reply, WriteAck
from ..register.server import ServerProcess
from ..simnet.trace import CORRUPT, STRATEGY
from .profiles import CorruptionAction, MessageTarget, ProfileKind, RequestKind, ScriptRule, ServerProfile

SHIFTS = (-2, -1, 1, 2)


class Forger:
    """Fresh never-written values for one server."""

    def __init__(self, server: str) -> None:
        self.server = server
        self.count = 0

    def next_value(self) -> str:
        self.count += 1
        return f"{FORGED_PREFIX}{self.server}:{self.count}"


def _shift(ts: int, delta: int) -> int:
    return max(0, ts + delta)


def corrupt_reply(action: CorruptionAction, truth: Reply, rng: random.Random, forger: Forger, delta: int | None = None) -> Reply | None:
    """Reply a malicious server sends instead of ``truth``; ``None`` means omit."""
    if action is CorruptionAction.OMIT:
        return None
    out = truth
    if action in (CorruptionAction.WRONG_VALUE, CorruptionAction.WRONG_BOTH):
        out = replace(out, val=frozenset({forger.next_value()}))
    if action in (CorruptionAction.WRONG_TIMESTAMP, CorruptionAction.WRONG_BOTH):
        d = delta if delta is not None else rng.choice(SHIFTS)
        out = replace(out, ts=_shift(out.ts, d), ots=_shift(out.ots, d))
    return out


def corrupt_ack(action: CorruptionAction, truth: WriteAck, rng: random.Random, forger: Forger, delta: int | None = None) -> WriteAck | None:
    """Ack a malicious server sends instead of ``truth``; without a fingerprint a wrong value changes nothing."""
    if action is CorruptionAction.OMIT:
        return None
    out = truth
    if action in (CorruptionAction.WRONG_VALUE, CorruptionAction.WRONG_BOTH) and truth.fingerprint is not None:
        out = replace(out, fingerprint=forger.next_value().encode())
    if action in (CorruptionAction.WRONG_TIMESTAMP, CorruptionAction.WRONG_BOTH):
        d = delta if delta is not None else rng.choice(SHIFTS)
        out = replace(out, ts=_shift(out.ts, d))
    return out


def choose_strategy(profile: ServerProfile) -> Strategy:
    """Best response of a rational server to one request."""
    assert profile.belief is not None, "choose_strategy needs a rational profile"
    return best_response(profile.belief, profile.payoffs)


class HonestBehaviour:
    """Sends everything unchanged."""

    def on_reply(self, server: ServerProcess, reply: Reply, cause: str) -> Reply | None:  # noqa: ARG002
        return reply

    def on_ack(self, server: ServerProcess, ack: WriteAck) -> WriteAck | None:  # noqa: ARG002
        return ack


class _Corrupting:
    def __init__(self, server: str, rng: random.Random) -> None:
        self.rng = rng
        self.forger = Forger(server)
        self.corrupted = 0

    def _record(self, server: ServerProcess, action: CorruptionAction, target: MessageTarget, cause: str, truth: Any, out: Any) -> None:
        self.corrupted += 1
        data = {
            "action": action.value,
            "target": target.value,
            "cause": cause,
            "truth": truth.summary(),
            "sent": None if out is None else out.summary(),
        }
        if out is not None and hasattr(out, "ts"):
            data["delta"] = out.ts - truth.ts
        server.net.trace.add(server.net.now, CORRUPT, server.pid, "", action.value, data)

    def _apply(self, server: ServerProcess, action: CorruptionAction, target: MessageTarget, cause: str, truth: Any, delta: int | None) -> Any:
        if target is MessageTarget.REPLY:
            out = corrupt_reply(action, truth, self.rng, self.forger, delta)
        else:
            out = corrupt_ack(action, truth, self.rng, self.forger, delta)
        if out == truth:
            return truth
        self._record(server, action, target, cause, truth, out)
        return out


class ScriptedBehaviour(_Corrupting):
    """Applies the first matching rule of a script."""

    def __init__(self, server: str, rules: tuple[ScriptRule, ...], rng: random.Random) -> None:
        super().__init__(server, rng)
        self.rules = rules
        self._seen = [0] * len(rules)

    def _rule_for(self, target: MessageTarget, request: RequestKind, tick: int) -> ScriptRule | None:
        for index, rule in enumerate(self.rules):
            if not rule.matches(target, request, tick):
                continue
            self._seen[index] += 1
            if (self._seen[index] - 1) % rule.every != 0:
                continue
            if rule.probability < 1.0 and self.rng.random() >= rule.probability:
                continue
            return rule
        return None

    def on_reply(self, server: ServerProcess, reply: Reply, cause: str) -> Reply | None:
        rule = self._rule_for(MessageTarget.REPLY, RequestKind(cause), server.net.now)
        if rule is None:
            return reply
        out: Reply | None = self._apply(server, rule.action, MessageTarget.REPLY, cause, reply, rule.delta)
        return out

    def on_ack(self, server: ServerProcess, ack: WriteAck) -> WriteAck | None:
        rule = self._rule_for(MessageTarget.ACK, RequestKind.WRITE, server.net.now)
        if rule is None:
            return ack
        out: WriteAck | None = self._apply(server, rule.action, MessageTarget.ACK, "write", ack, rule.delta)
        return out


class RationalBehaviour(_Corrupting):
    """Plays the best response of the game on every READ it answers.

    Acks and replies forwarded because of a WRITE follow the protocol.
    """

    def __init__(self, server: str, profile: ServerProfile, rng: random.Random) -> None:
        super().__init__(server, rng)
        assert profile.belief is not None
        self.profile = profile
        self.belief: Belief = profile.belief
        self.payoffs: PayoffParams = profile.payoffs
        self.action = profile.action
        self.decisions: dict[Strategy, int] = {strategy: 0 for strategy in Strategy}

    def on_reply(self, server: ServerProcess, reply: Reply, cause: str) -> Reply | None:
        if cause != RequestKind.READ.value:
            return reply
        strategy = choose_strategy(self.profile)
        self.decisions[strategy] += 1
        gains = {s.value: expected_gain(s, self.belief, self.payoffs) for s in Strategy}
        server.net.trace.add(
            server.net.now,
            STRATEGY,
            server.pid,
            "",
            strategy.value,
            {"theta": self.belief.theta, "gains": gains},
        )
        if strategy is not Strategy.ATTACK:
            return reply
        out: Reply | None = self._apply(server, self.action, MessageTarget.REPLY, cause, reply, None)
        return out

    def on_ack(self, server: ServerProcess, ack: WriteAck) -> WriteAck | None:  # noqa: ARG002
        return ack


def behaviour_for(server: str, profile: ServerProfile, rng: random.Random) -> HonestBehaviour | ScriptedBehaviour | RationalBehaviour:
    """Behaviour implementing ``profile``; crash profiles behave honestly until the engine stops them."""
    if profile.kind is ProfileKind.SCRIPTED:
        return ScriptedBehaviour(server, profile.rules, rng)
    if profile.kind is ProfileKind.RATIONAL:
        return RationalBehaviour(server, profile, rng)
    return HonestBehaviour()
