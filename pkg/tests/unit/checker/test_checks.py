"""Unit tests for the offline checks on hand-built traces."""

from hypothesis import given, settings
from hypothesis import strategies as st

from ratreg.adversary import ServerProfile
from ratreg.checker import (
    History,
    OperationRecord,
    admissible_values,
    check_detection_accuracy,
    check_termination,
    check_timestamp_rules,
    check_validity,
    cost_report,
    evaluate,
    validity_oracle,
)
from ratreg.register import ProtocolKind
from ratreg.simnet import TimingParams, Trace
from ratreg.simnet.trace import COIN, CORRUPT, CRASH, DETECT, FINGERPRINT, OP_INVOKE, OP_RETURN, SEND, SNAPSHOT

TIMING = TimingParams(delta=10, delta_prime=5)


def add_op(trace, op_id, client, kind, t_b, t_e=None, value=None, outcome=None, ts=None):
    data = {"op_id": op_id, "op": kind}
    if kind == "write":
        data["value"] = value
    trace.add(t_b, OP_INVOKE, client, "", kind, data)
    if t_e is not None:
        outcome = outcome or ("ok" if kind == "write" else "value")
        returned = None if kind == "write" else value
        trace.add(t_e, OP_RETURN, client, "", outcome, {"op_id": op_id, "op": kind, "outcome": outcome, "value": returned, "ts": ts})


def one_write_trace(read_at=40, read_value="a", read_outcome=None):
    trace = Trace()
    add_op(trace, 0, "c1", "write", 0, 30, "a", ts=1)
    add_op(trace, 1, "c2", "read", read_at, read_at + 20, read_value, outcome=read_outcome, ts=1)
    return trace


class TestHistory:
    def test_from_trace(self):
        trace = one_write_trace()
        trace.add(90, CRASH, "c2")
        history = History.from_trace(trace)
        write, read = history.records
        assert (write.op_kind, write.value, write.t_b, write.t_e, write.ts) == ("write", "a", 0, 30, 1)
        assert (read.op_kind, read.value, read.outcome) == ("read", "a", "value")
        assert write.precedes(read)
        assert history.crashed == {"c2": 90}

    def test_incomplete_operation(self):
        trace = Trace()
        add_op(trace, 0, "c1", "write", 0, value="a")
        (write,) = History.from_trace(trace).records
        assert not write.complete
        assert write.value == "a"


class TestTermination:
    def test_exact_durations_pass(self):
        history = History.from_trace(one_write_trace())
        assert check_termination(history, TIMING) == []

    def test_short_write_fails(self):
        trace = Trace()
        add_op(trace, 0, "c1", "write", 0, 25, "a", ts=1)
        (violation,) = check_termination(History.from_trace(trace), TIMING)
        assert violation.check == "termination"
        assert violation.evidence == {"duration": 25}

    def test_witness_duration_only_for_collaborative_reads(self):
        trace = Trace()
        add_op(trace, 0, "c2", "read", 5, 45, "a")
        history = History.from_trace(trace)
        assert len(check_termination(history, TIMING, ProtocolKind.P)) == 1
        assert check_termination(history, TIMING, ProtocolKind.PCV) == []

    def test_pending_operation_of_crashed_client_is_excused(self):
        trace = Trace()
        add_op(trace, 0, "c1", "write", 0, value="a")
        assert len(check_termination(History.from_trace(trace), TIMING)) == 1
        trace.add(12, CRASH, "c1")
        assert check_termination(History.from_trace(trace), TIMING) == []


class TestValidity:
    def test_read_after_write_must_see_it(self):
        assert check_validity(History.from_trace(one_write_trace())).violations == []
        stale = check_validity(History.from_trace(one_write_trace(read_value=None, read_outcome="bottom")))
        assert stale.invalid_reads == {1}

    def test_concurrent_read_may_see_either(self):
        for value, outcome in ((None, "bottom"), ("a", "value")):
            history = History.from_trace(one_write_trace(read_at=10, read_value=value, read_outcome=outcome))
            assert check_validity(history).violations == []
        history = History.from_trace(one_write_trace(read_at=10, read_value="zzz"))
        assert admissible_values(history, history.reads()[0]) == [None, "a"]
        assert check_validity(history).invalid_reads == {1}

    def test_aborts_are_listed_not_judged(self):
        report = check_validity(History.from_trace(one_write_trace(read_value=None, read_outcome="abort")))
        assert report.aborts == [1]
        assert report.violations == []
        assert report.checked == 0

    def test_oracle_agrees_on_example(self):
        history = History.from_trace(one_write_trace(read_value="stale"))
        assert validity_oracle(history) == check_validity(history).invalid_reads == {1}

    @settings(deadline=None, max_examples=200)
    @given(
        gaps=st.lists(st.integers(min_value=1, max_value=40), min_size=1, max_size=6),
        reads=st.lists(
            st.tuples(st.integers(min_value=0, max_value=250), st.sampled_from([0, 20, 30]), st.integers(min_value=-1, max_value=6)),
            max_size=8,
        ),
    )
    def test_oracle_agrees_with_checker(self, gaps, reads):
        records = []
        t = 0
        for index, gap in enumerate(gaps):
            t += gap
            records.append(OperationRecord(index, "write", "c1", t, t + 30, value=f"v{index}", outcome="ok", ts=index + 1))
            t += 30
        for offset, (t_b, duration, pick) in enumerate(reads):
            value = None if pick < 0 else f"v{pick}"
            outcome = "bottom" if value is None else "value"
            records.append(OperationRecord(100 + offset, "read", "c2", t_b, t_b + duration, value=value, outcome=outcome))
        history = History(records=records)
        assert validity_oracle(history) == check_validity(history).invalid_reads


class TestDetectionAccuracy:
    def test_detecting_an_honest_server_is_a_false_positive(self):
        trace = Trace()
        trace.add(20, DETECT, "c1", "s2", "omission", {"op_id": 0})
        report = check_detection_accuracy(trace, {"s2": ServerProfile.honest()})
        assert report.detections == 1
        assert len(report.false_positives) == 1
        assert report.false_positives[0].evidence == {"server": "s2"}

    def test_detecting_after_deviation_is_sound(self):
        trace = Trace()
        trace.add(15, CORRUPT, "s3", "", "WrongValue")
        trace.add(20, DETECT, "c1", "s3", "wrong-value", {"op_id": 0})
        report = check_detection_accuracy(trace, {"s3": ServerProfile.scripted()})
        assert report.false_positives == []
        assert report.detected_servers == {"s3"}

    def test_detecting_before_deviation_is_not(self):
        trace = Trace()
        trace.add(20, DETECT, "c1", "s3", "omission", {"op_id": 0})
        trace.add(25, CORRUPT, "s3", "", "WrongValue")
        report = check_detection_accuracy(trace, {"s3": ServerProfile.scripted()})
        assert len(report.false_positives) == 1

    def test_crashed_server_detection_is_reported_apart(self):
        trace = Trace()
        trace.add(5, CRASH, "s1")
        trace.add(20, DETECT, "c1", "s1", "omission", {"op_id": 0})
        report = check_detection_accuracy(trace, {"s1": ServerProfile.crash(5)})
        assert report.false_positives == []
        assert report.crash_detections == ["s1"]


class TestTimestampRules:
    def test_skipped_timestamp(self):
        trace = Trace()
        add_op(trace, 0, "c1", "write", 0, 30, "a", ts=1)
        add_op(trace, 1, "c1", "write", 40, 70, "b", ts=3)
        assert [v.check for v in check_timestamp_rules(trace)] == ["ts-increment"]

    def test_clients_must_agree_at_write_end(self):
        trace = Trace()
        add_op(trace, 0, "c1", "write", 0, 30, "a", ts=1)
        trace.add(
            30,
            SNAPSHOT,
            "",
            "",
            "",
            {"op_id": 0, "clients": {"c1": {"last_ts": 1}, "c2": {"last_ts": 0}}, "servers": {"s1": {"val": ["a"]}}},
        )
        assert [v.check for v in check_timestamp_rules(trace)] == ["last-ts-agreement"]

    def test_server_missing_the_write(self):
        trace = Trace()
        add_op(trace, 0, "c1", "write", 0, 30, "a", ts=1)
        trace.add(30, SNAPSHOT, "", "", "", {"op_id": 0, "clients": {"c1": {"last_ts": 1}}, "servers": {"s1": {"val": ["a"]}, "s2": {"val": []}}})
        violations = check_timestamp_rules(trace)
        assert [(v.check, v.evidence) for v in violations] == [("effective-write", {"server": "s2"})]


class TestCosts:
    def test_counts_by_kind(self):
        trace = Trace()
        for _ in range(3):
            trace.add(0, SEND, "clients", "s1", "READ()")
        trace.add(1, SEND, "s1", "c1", "REPLY(s1,1,{'a'},0,{})")
        trace.add(2, SEND, "clients", "c2", "DETECTED(s2)")
        trace.add(2, SEND, "clients", "c2", "CHECK_TS(1)")
        trace.add(3, FINGERPRINT, "c1", "", "3", {"count": 3})
        trace.add(3, COIN, "c1", "", "heads", {"heads": True})
        trace.add(4, COIN, "c1", "", "tails", {"heads": False})
        report = cost_report(trace)
        assert report.messages_total == 5
        assert report.notifications == 1
        assert report.check_messages == 1
        assert report.messages_by_kind == {"CHECK_TS": 1, "DETECTED": 1, "READ": 3, "REPLY": 1}
        assert (report.fingerprint_ops, report.coin_flips, report.coin_heads) == (3, 2, 1)


class TestVerdict:
    def test_clean_run_passes(self):
        verdict = evaluate(one_write_trace(), timing=TIMING, protocol=ProtocolKind.P, profiles={}, scenario="demo", seed=4)
        assert verdict.passed
        assert [c.name for c in verdict.checks] == ["termination", "validity", "detection", "timestamps"]
        assert (verdict.reads, verdict.writes, verdict.aborts) == (1, 1, 0)
        assert '"schema": "ratreg.verdict/1"' in verdict.to_json()

    def test_invalid_read_fails_the_run(self):
        verdict = evaluate(one_write_trace(read_value="stale"), timing=TIMING, protocol=ProtocolKind.P, profiles={})
        assert not verdict.passed
        assert verdict.invalid_reads == [1]
        validity = verdict.check("validity")
        assert validity is not None and not validity.passed

    def test_selected_checks_only(self):
        verdict = evaluate(one_write_trace(read_value="stale"), timing=TIMING, protocol=ProtocolKind.P, profiles={}, checks=("termination",))
        assert verdict.passed
        assert verdict.check("validity") is None
