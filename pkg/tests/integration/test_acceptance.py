"""Seeded acceptance loops over honest, adversarial and rational worlds."""

import itertools

import pytest

from ratreg import parse_scenario, simulate
from ratreg.experiment import attack_variant, sweep_base
from ratreg.simnet.trace import COIN

HONEST = """
name = "regularity"
protocol = "{protocol}"
n_servers = {n}
n_clients = {clients}
[timing]
delta = {delta}
delta_prime = {delta_prime}
[generator]
writes = 3
reads_per_client = 3
"""

ADVERSARY = """
name = "soundness"
protocol = "{protocol}"
n_servers = 4
n_clients = 3
[generator]
writes = 3
reads_per_client = 3
[[profiles]]
server = 4
kind = "scripted"
rules = [{rule}]
[[profiles]]
server = 2
kind = "crash"
crash_at = {crash_at}
"""

RULES = [
    '{ action = "WrongValue" }',
    '{ action = "WrongTimestamp", delta = 1 }',
    '{ action = "WrongTimestamp", delta = -1 }',
    '{ action = "WrongTimestamp", delta = 2 }',
    '{ action = "WrongTimestamp", delta = -2 }',
    '{ action = "WrongBoth" }',
    '{ action = "Omit" }',
    '{ action = "Omit", target = "ack" }',
    '{ action = "WrongTimestamp", target = "ack", delta = 1 }',
    '{ action = "WrongValue", target = "any", every = 3, probability = 0.5 }',
]

RATIONAL_MAJORITY = """
name = "rational-majority"
protocol = "{protocol}"
n_servers = 4
n_clients = 3
[generator]
writes = 3
reads_per_client = 3
""" + "".join(f'[[profiles]]\nserver = {i}\nkind = "rational"\ntheta = 0.6\npayoffs = {{ g_s = 1.0, d_s = 1.0 }}\n' for i in (2, 3, 4))

PROTOCOLS = ["p", "pcv", "phash"]

GRID = list(itertools.product(range(1, 6), range(1, 4), (2, 10)))

def honest(protocol, n, clients, delta):
    return parse_scenario(HONEST.format(protocol=protocol, n=n, clients=clients, delta=delta, delta_prime=max(1, delta // 2)))


def adversary(protocol, rule, seed):
    return parse_scenario(ADVERSARY.format(protocol=protocol, rule=rule, crash_at=25 + 17 * (seed % 10)))


def coin_faces(trace):
    return [r.payload == "heads" for r in trace.of_kind(COIN)]


@pytest.mark.slow
class TestRegularityUnderHonesty:
    @pytest.mark.parametrize(("n", "clients", "delta"), GRID)
    def test_no_violations(self, n, clients, delta):
        for protocol, seed in itertools.product(PROTOCOLS, range(4)):
            verdict = simulate(honest(protocol, n, clients, delta), seed=seed).verdict
            assert verdict.passed, (protocol, seed, [c.violations for c in verdict.checks])
            assert verdict.detections == 0

    @pytest.mark.parametrize("protocol", PROTOCOLS)
    def test_thousand_seeds(self, protocol):
        for seed in range(1000):
            n, clients, delta = GRID[seed % len(GRID)]
            verdict = simulate(honest(protocol, n, clients, delta), seed=seed).verdict
            assert verdict.passed, (n, clients, delta, seed, [c.violations for c in verdict.checks])


@pytest.mark.slow
class TestDetectionSoundness:
    @pytest.mark.parametrize("rule", RULES)
    def test_honest_servers_are_never_detected(self, rule):
        for protocol, seed in itertools.product(PROTOCOLS, range(10)):
            verdict = simulate(adversary(protocol, rule, seed), seed=seed).verdict
            assert verdict.false_positives == 0, (protocol, seed)
            termination = verdict.check("termination")
            assert termination is not None and termination.passed, (protocol, seed, termination.violations)

    @pytest.mark.parametrize("protocol", PROTOCOLS)
    def test_thousand_seeds(self, protocol):
        for seed in range(1000):
            rule = RULES[seed % len(RULES)]
            verdict = simulate(adversary(protocol, rule, seed), seed=seed).verdict
            assert verdict.false_positives == 0, (rule, seed)
            assert verdict.missed_detections == 0, (rule, seed)


@pytest.mark.slow
class TestDetectionCompleteness:
    @pytest.mark.parametrize("rule", RULES)
    @pytest.mark.parametrize("protocol", PROTOCOLS)
    def test_every_deviation_is_caught_where_the_rules_reach(self, protocol, rule):
        for seed in range(10):
            verdict = simulate(adversary(protocol, rule, seed), seed=seed).verdict
            assert verdict.missed_detections == 0, (seed, [c.violations for c in verdict.checks])

    def test_omission_is_caught(self):
        verdict = simulate(adversary("p", '{ action = "Omit" }', 0), seed=0).verdict
        assert verdict.missed_detections == 0
        assert "s4" in verdict.detected_servers


@pytest.mark.slow
class TestEquilibrium:
    @pytest.mark.parametrize("protocol", PROTOCOLS)
    def test_rational_majority_above_threshold_never_attacks(self, protocol):
        for seed in range(10):
            verdict = simulate(parse_scenario(RATIONAL_MAJORITY.format(protocol=protocol)), seed=seed).verdict
            assert verdict.corrupted_messages == 0
            assert verdict.passed, (seed, [c.violations for c in verdict.checks])


@pytest.mark.slow
class TestCoinRate:
    @pytest.mark.parametrize("protocol", ["pcv", "phash"])
    def test_fallbacks_follow_coin_p(self, protocol):
        # every run holds one read that reaches the fallback
        scenario = attack_variant(sweep_base(4, 3)).with_overrides(protocol=protocol, coin_p=0.5, checks=["termination"])
        faces = [face for seed in range(10_000) for face in coin_faces(simulate(scenario, seed=seed).trace)]
        assert len(faces) >= 10_000
        assert sum(faces) / len(faces) == pytest.approx(0.5, abs=0.02)

    def test_lower_coin_p(self):
        scenario = attack_variant(sweep_base(4, 3)).with_overrides(protocol="pcv", coin_p=0.2, checks=["termination"])
        faces = [face for seed in range(2000) for face in coin_faces(simulate(scenario, seed=seed).trace)]
        assert sum(faces) / len(faces) == pytest.approx(0.2, abs=0.04)


@pytest.mark.slow
def test_fixed_seed_reproduces_trace():
    scenario = adversary("pcv", RULES[5], 1)
    assert simulate(scenario, seed=99).trace.to_jsonl() == simulate(scenario, seed=99).trace.to_jsonl()
