"""Unit tests for scenario parsing and validation."""

import pytest

from ratreg.adversary import ProfileKind
from ratreg.errors import ScenarioError
from ratreg.register import ProtocolKind
from ratreg.scenario import load_scenario, parse_scenario, validate_scenario
from ratreg.variants import FingerprintKind

MINIMAL = """
schema = "ratreg.scenario/1"
name = "minimal"
"""

RATIONAL = """
name = "rational"
protocol = "phash"
n_servers = 4
n_clients = 3
coin_p = 1.0
fingerprint = "encoded"

[timing]
delta = 8
delta_prime = 4
worst_case = true

[[profiles]]
server = 4
kind = "rational"
clients = 3
payoffs = { g_s = 2.0, d_s = 1.0 }

[[profiles]]
server = 2
kind = "scripted"
rules = [{ action = "WrongTimestamp", target = "ack", delta = 1 }]

[client_crashes]
2 = 50
"""


class TestParsing:
    def test_minimal_document(self):
        scenario = parse_scenario(MINIMAL)
        assert scenario.name == "minimal"
        assert scenario.protocol is ProtocolKind.P
        assert scenario.server_ids == ["s1", "s2", "s3"]
        assert scenario.client_ids == ["c1", "c2"]
        assert scenario.checks == ["termination", "validity", "detection", "timestamps"]

    def test_profiles_and_timing(self):
        scenario = parse_scenario(RATIONAL)
        profiles = scenario.profile_map()
        assert profiles["s4"].kind is ProfileKind.RATIONAL
        assert profiles["s4"].belief is not None and profiles["s4"].belief.theta == pytest.approx(1 / 3)
        assert profiles["s2"].rules[0].delta == 1
        assert profiles["s1"].kind is ProfileKind.HONEST
        assert scenario.client_crashes == {2: 50}
        assert scenario.fingerprint is FingerprintKind.ENCODED
        assert scenario.timing_params().delta == 8
        assert scenario.timing.policy.value == "worst_case"

    def test_json_document(self):
        scenario = parse_scenario('{"name": "j", "protocol": "pcv", "seed": 9}', "json")
        assert (scenario.protocol, scenario.seed) == (ProtocolKind.PCV, 9)

    def test_durations(self):
        scenario = parse_scenario('protocol = "pcv"')
        assert scenario.write_duration == 30
        assert scenario.max_read_duration == 40
        assert parse_scenario(MINIMAL).max_read_duration == 30

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario(tmp_path / "nope.toml")

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "s.toml"
        path.write_text(MINIMAL)
        assert load_scenario(path).name == "minimal"

    def test_broken_toml(self):
        with pytest.raises(ScenarioError, match="not valid TOML"):
            parse_scenario("name = ")


class TestValidation:
    def test_unknown_protocol_tag(self):
        with pytest.raises(ScenarioError, match="unknown protocol tag"):
            parse_scenario('protocol = "pbft"')

    def test_all_servers_rational(self):
        doc = "n_servers = 2\n" + "".join(f'[[profiles]]\nserver = {i}\nkind = "rational"\ntheta = 0.1\n' for i in (1, 2))
        with pytest.raises(ScenarioError, match="no honest alive server"):
            parse_scenario(doc)

    def test_crashing_servers_are_not_honest_alive(self):
        with pytest.raises(ScenarioError, match="no honest alive server"):
            parse_scenario('n_servers = 1\n[[profiles]]\nserver = 1\nkind = "crash"\ncrash_at = 5\n')

    def test_overlapping_writes(self):
        doc = """
        [[workload]]
        client = 1
        op = "write"
        value = "a"
        at = 0
        [[workload]]
        client = 2
        op = "write"
        value = "b"
        at = 10
        """
        with pytest.raises(ScenarioError, match="overlapping writes"):
            parse_scenario(doc)

    def test_client_overlapping_itself(self):
        doc = """
        [[workload]]
        client = 2
        op = "read"
        at = 0
        [[workload]]
        client = 2
        op = "read"
        at = 30
        """
        with pytest.raises(ScenarioError, match="client 2"):
            parse_scenario(doc)

    def test_forged_values_cannot_be_written(self):
        doc = '[[workload]]\nclient = 1\nop = "write"\nvalue = "forged:x"\nat = 0\n'
        with pytest.raises(ScenarioError, match="may not start with"):
            parse_scenario(doc)

    def test_profile_beyond_server_count(self):
        with pytest.raises(ScenarioError, match="only 3 servers"):
            parse_scenario('[[profiles]]\nserver = 5\nkind = "crash"\ncrash_at = 1\n')

    def test_scripted_profile_needs_rules(self):
        with pytest.raises(ScenarioError, match="needs at least one rule"):
            parse_scenario('[[profiles]]\nserver = 1\nkind = "scripted"\n')

    def test_label_bound_above_broadcast_bound(self):
        with pytest.raises(ScenarioError, match="delta_prime"):
            parse_scenario("[timing]\ndelta = 4\ndelta_prime = 5\n")

    def test_unknown_fields_are_rejected(self):
        with pytest.raises(ScenarioError):
            validate_scenario({"name": "x", "servers": 3})


class TestOverrides:
    def test_override_revalidates(self):
        scenario = parse_scenario(MINIMAL)
        changed = scenario.with_overrides(protocol="phash", seed=3, runs=None)
        assert (changed.protocol, changed.seed, changed.runs) == (ProtocolKind.PHASH, 3, 1)
        assert scenario.protocol is ProtocolKind.P

    def test_override_with_enum_member(self):
        assert parse_scenario(MINIMAL).with_overrides(protocol=ProtocolKind.PCV).protocol is ProtocolKind.PCV

    def test_bad_override(self):
        with pytest.raises(ScenarioError):
            parse_scenario(MINIMAL).with_overrides(protocol="nope")
