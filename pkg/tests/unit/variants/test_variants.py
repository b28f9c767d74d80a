"""Unit tests for the collaborative and fingerprint variants."""

import random

import pytest

from ratreg.errors import InvalidParameterError
from ratreg.register import CheckTs, ClientState, Detection, DetectionReason, OutcomeKind, Write
from ratreg.simnet import TimingParams
from ratreg.variants import (
    KNOWN_WINDOW,
    Coin,
    FingerprintKind,
    cv_read_fallback,
    encode_fingerprint,
    hash_read_verify,
    hash_write_decorate,
    refresh_known,
    sha256_fingerprint,
    should_vouch,
    witness_cross_check,
)

SERVERS = ["s1", "s2", "s3"]


def drive(steps):
    waits = []
    try:
        while True:
            waits.append(next(steps))
    except StopIteration as stop:
        return waits, stop.value


class FakePort:
    def __init__(self, state, witnesses):
        self.state = state
        self.timing = TimingParams(delta=10, delta_prime=5)
        self.witnesses = witnesses
        self.coins: list[bool] = []
        self.requests: list[CheckTs] = []
        self.detections: list[Detection] = []
        self.notes: list[str] = []

    def record_coin(self, heads):
        self.coins.append(heads)

    def open_witness_window(self, request):
        self.requests.append(request)

    def close_witness_window(self):
        return self.witnesses

    def apply_detections(self, detections):
        self.detections.extend(detections)

    def note(self, text):
        self.notes.append(text)


@pytest.fixture
def state():
    return ClientState.initial(SERVERS)


class TestCoin:
    def test_certain_coins(self):
        heads = Coin(p=1.0)
        tails = Coin(p=0.0)
        assert all(heads.flip() for _ in range(20))
        assert not any(tails.flip() for _ in range(20))
        assert heads.rate == 1.0
        assert tails.rate == 0.0

    def test_rejects_probability_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            Coin(p=1.2)

    def test_seeded_coins_agree(self):
        a = Coin(p=0.5, rng=random.Random(3))
        b = Coin(p=0.5, rng=random.Random(3))
        assert [a.flip() for _ in range(50)] == [b.flip() for _ in range(50)]

    def test_rate_of_fair_coin(self):
        coin = Coin(p=0.5, rng=random.Random(12))
        for _ in range(4000):
            coin.flip()
        assert coin.rate == pytest.approx(0.5, abs=0.05)


class TestCollaborative:
    def test_only_writers_vouch(self, state):
        assert not should_vouch(state, CheckTs((1,)))
        state.my_last_val, state.my_last_ts = "a", 3
        assert should_vouch(state, CheckTs((2, 3)))
        assert not should_vouch(state, CheckTs((4, 5)))

    def test_cross_check_reasons(self, state):
        state.replies = {("s1", 2, frozenset({"a"})), ("s1", 1, frozenset({"z"})), ("s2", 2, frozenset({"x"})), ("s3", 3, frozenset({"y"}))}
        assert witness_cross_check(state, state.replies, {2: "a"}) == [Detection("s2", DetectionReason.WITNESS_MISMATCH)]

    def test_cross_check_ignores_detected_servers(self, state):
        state.honest.discard("s2")
        state.replies = {("s1", 2, frozenset({"a"})), ("s2", 2, frozenset({"x"}))}
        assert witness_cross_check(state, state.replies, {2: "a"}) == []

    def test_tails_falls_back_to_unanimous_pair(self, state):
        for sid in SERVERS:
            state.add_reply(sid, 1, frozenset({"a"}), 0, frozenset())
        port = FakePort(state, {})
        waits, outcome = drive(cv_read_fallback(port, Coin(p=0.0)))
        assert waits == []
        assert port.coins == [False]
        assert (outcome.kind, outcome.value) == (OutcomeKind.VALUE, "a")

    def test_tails_without_agreement_aborts(self, state):
        state.add_reply("s1", 1, frozenset({"a"}), 0, frozenset())
        _, outcome = drive(cv_read_fallback(FakePort(state, {}), Coin(p=0.0)))
        assert outcome.kind is OutcomeKind.ABORT

    def test_heads_returns_the_freshest_witness(self, state):
        state.add_reply("s1", 2, frozenset({"b"}), 1, frozenset({"a"}))
        state.add_reply("s2", 2, frozenset({"b"}), 1, frozenset({"a"}))
        state.add_reply("s3", 2, frozenset({"forged:s3:1"}), 1, frozenset({"a"}))
        port = FakePort(state, {1: "a", 2: "b"})
        waits, outcome = drive(cv_read_fallback(port, Coin(p=1.0)))
        assert waits == [10]
        assert port.requests == [CheckTs((1, 2))]
        assert (outcome.kind, outcome.value, outcome.ts) == (OutcomeKind.VALUE, "b", 2)
        assert port.detections == [Detection("s3", DetectionReason.WITNESS_MISMATCH)]

    def test_heads_without_witness_aborts(self, state):
        state.add_reply("s1", 2, frozenset({"b"}), 1, frozenset({"a"}))
        state.acked.add(("s1", 2))
        port = FakePort(state, {})
        _, outcome = drive(cv_read_fallback(port, Coin(p=1.0)))
        assert outcome.kind is OutcomeKind.ABORT
        assert port.notes == ["witness-missing"]
        assert port.detections == []

    def test_acknowledged_write_of_a_silent_writer_aborts(self, state):
        # the writer of ts 2 crashed; s1 applied and acknowledged it, s2 lags at ts 1
        state.add_reply("s1", 2, frozenset({"v2"}), 1, frozenset({"v1"}))
        state.add_reply("s2", 1, frozenset({"v1"}), 0, frozenset())
        state.acked.update({("s1", 1), ("s2", 1), ("s1", 2)})
        port = FakePort(state, {1: "v1"})
        _, outcome = drive(cv_read_fallback(port, Coin(p=1.0)))
        assert outcome.kind is OutcomeKind.ABORT
        assert port.detections == []
        assert port.notes == ["witness-missing"]

    def test_unacknowledged_claim_is_detected(self, state):
        state.add_reply("s1", 1, frozenset({"a"}), 0, frozenset())
        state.add_reply("s2", 1, frozenset({"a"}), 0, frozenset())
        state.add_reply("s3", 2, frozenset({"forged:s3:1"}), 1, frozenset({"a"}))
        state.acked.update({("s1", 1), ("s2", 1), ("s3", 1)})
        port = FakePort(state, {1: "a"})
        _, outcome = drive(cv_read_fallback(port, Coin(p=1.0)))
        assert (outcome.kind, outcome.value, outcome.ts) == (OutcomeKind.VALUE, "a", 1)
        assert port.detections == [Detection("s3", DetectionReason.UNWITNESSED)]

    def test_claim_without_ack_or_older_witness_aborts(self, state):
        state.add_reply("s1", 2, frozenset({"b"}), 1, frozenset({"a"}))
        port = FakePort(state, {})
        _, outcome = drive(cv_read_fallback(port, Coin(p=1.0)))
        assert outcome.kind is OutcomeKind.ABORT
        assert port.detections == [Detection("s1", DetectionReason.UNWITNESSED)]

    def test_nothing_written_reads_bottom(self, state):
        state.add_reply("s1", 0, frozenset(), 0, frozenset())
        state.add_reply("s2", 1, frozenset({"forged:s2:1"}), 0, frozenset())
        port = FakePort(state, {})
        _, outcome = drive(cv_read_fallback(port, Coin(p=1.0)))
        assert outcome.kind is OutcomeKind.BOTTOM
        assert port.detections == [Detection("s2", DetectionReason.UNWITNESSED)]
        assert port.notes == []

    def test_replies_after_the_request_are_not_judged(self, state):
        state.add_reply("s1", 1, frozenset({"a"}), 0, frozenset())
        port = FakePort(state, {1: "a"})
        steps = cv_read_fallback(port, Coin(p=1.0))
        assert next(steps) == 10
        state.add_reply("s2", 3, frozenset({"late"}), 2, frozenset({"b"}))
        _, outcome = drive(steps)
        assert (outcome.kind, outcome.value) == (OutcomeKind.VALUE, "a")
        assert port.requests == [CheckTs((0, 1))]
        assert port.detections == []


class TestFingerprints:
    def test_encoding_separates_types(self):
        assert encode_fingerprint("1", 1) != encode_fingerprint(1, 1)
        assert encode_fingerprint("a|1", 2) != encode_fingerprint("a", 12)

    def test_sha256_digest_size(self):
        assert len(sha256_fingerprint("a", 1)) == 32

    def test_kind_selects_function(self):
        assert FingerprintKind.ENCODED.fn is encode_fingerprint
        assert FingerprintKind("sha256").fn is sha256_fingerprint

    def test_write_decoration(self):
        msg = hash_write_decorate(Write("a", 3), encode_fingerprint)
        assert msg.fingerprint == encode_fingerprint("a", 3)
        assert (msg.val, msg.ts) == ("a", 3)


class TestKnownFingerprints:
    def test_adopts_unanimous_digest(self, state):
        state.ack_fingerprints = {1: {sid: b"x" for sid in SERVERS}}
        refresh_known(state)
        assert state.known == {1: b"x"}

    def test_disagreement_is_not_adopted(self, state):
        state.ack_fingerprints = {1: {"s1": b"x", "s2": b"x", "s3": b"y"}}
        refresh_known(state)
        assert state.known == {}

    def test_missing_sender_is_not_adopted(self, state):
        state.ack_fingerprints = {1: {"s1": b"x", "s2": b"x"}}
        refresh_known(state)
        assert state.known == {}
        state.honest.discard("s3")
        refresh_known(state)
        assert state.known == {1: b"x"}

    def test_window_keeps_latest_timestamps(self, state):
        state.ack_fingerprints = {ts: {sid: bytes([ts]) for sid in SERVERS} for ts in (1, 2, 3)}
        refresh_known(state)
        assert sorted(state.known) == [2, 3]
        assert len(state.known) == KNOWN_WINDOW


class TestHashReadVerify:
    def test_tails_skips_verification(self, state):
        result = hash_read_verify(state, set(), Coin(p=0.0), {}, encode_fingerprint)
        assert not result.ran
        assert result.fingerprint_ops == 0

    def test_heads_flags_mismatching_servers(self, state):
        replies = {
            ("s1", 1, frozenset({"a"})),
            ("s2", 1, frozenset({"forged:s2:1"})),
            ("s3", 1, frozenset({"a"})),
            ("s3", 0, frozenset()),
        }
        known = {1: encode_fingerprint("a", 1)}
        result = hash_read_verify(state, replies, Coin(p=1.0), known, encode_fingerprint)
        assert result.ran
        assert result.detections == [Detection("s2", DetectionReason.FINGERPRINT_MISMATCH)]
        assert result.fingerprint_ops == 3

    def test_unknown_timestamps_are_not_checked(self, state):
        replies = {("s1", 5, frozenset({"q"}))}
        result = hash_read_verify(state, replies, Coin(p=1.0), {1: b"x"}, encode_fingerprint)
        assert result.detections == []
        assert result.fingerprint_ops == 0
