"""Unit tests for client-side misbehaviour detection."""

import pytest

from ratreg.register import ClientState, Detection, DetectionReason, SetType, detection

SERVERS = ["s1", "s2", "s3"]


@pytest.fixture
def state():
    return ClientState.initial(SERVERS)


def reply(state, j, ts, val, ots=0, oval=frozenset()):
    state.add_reply(j, ts, frozenset(val), ots, oval)


class TestAckDetection:
    def test_clean_acks(self, state):
        state.my_last_ts = 2
        acks = {(sid, 2, None) for sid in SERVERS}
        assert detection(state, acks, SetType.ACKS) == []

    def test_missing_ack_is_omission(self, state):
        state.my_last_ts = 2
        acks = {("s1", 2, None), ("s2", 2, None)}
        assert detection(state, acks, SetType.ACKS) == [Detection("s3", DetectionReason.OMISSION)]

    def test_wrong_timestamp(self, state):
        state.my_last_ts = 2
        acks = {("s1", 2, None), ("s2", 1, None), ("s3", 2, None)}
        assert detection(state, acks, SetType.ACKS) == [Detection("s2", DetectionReason.ACK_TIMESTAMP)]

    def test_wrong_fingerprint(self, state):
        state.my_last_ts = 1
        state.my_last_fingerprint = b"good"
        acks = {("s1", 1, b"good"), ("s2", 1, b"good"), ("s3", 1, b"evil")}
        assert detection(state, acks, SetType.ACKS) == [Detection("s3", DetectionReason.ACK_FINGERPRINT)]

    def test_only_honest_servers_are_reported(self, state):
        state.honest.discard("s3")
        state.my_last_ts = 1
        assert detection(state, {("s1", 1, None), ("s2", 1, None)}, SetType.ACKS) == []


class TestReplyDetection:
    def test_consistent_replies(self, state):
        state.last_ts = 1
        for sid in SERVERS:
            reply(state, sid, 1, {"a"})
        assert detection(state, state.replies, SetType.REPLIES) == []

    def test_silent_server(self, state):
        state.last_ts = 1
        reply(state, "s1", 1, {"a"})
        reply(state, "s3", 1, {"a"})
        assert detection(state, state.replies, SetType.REPLIES) == [Detection("s2", DetectionReason.OMISSION)]

    def test_timestamp_too_new(self, state):
        state.last_ts = 1
        reply(state, "s1", 1, {"a"})
        reply(state, "s2", 3, {"x"}, 1, frozenset({"a"}))
        reply(state, "s3", 1, {"a"})
        assert detection(state, state.replies, SetType.REPLIES) == [Detection("s2", DetectionReason.TOO_NEW)]

    def test_timestamp_too_old(self, state):
        state.last_ts = 3
        reply(state, "s1", 1, {"a"})
        reply(state, "s2", 3, {"c"}, 2, frozenset({"b"}))
        reply(state, "s3", 3, {"c"}, 2, frozenset({"b"}))
        assert detection(state, state.replies, SetType.REPLIES) == [Detection("s1", DetectionReason.TOO_OLD)]

    def test_lagging_by_one_is_tolerated(self, state):
        state.last_ts = 3
        reply(state, "s1", 2, {"b"}, 1, frozenset({"a"}))
        reply(state, "s2", 3, {"c"}, 2, frozenset({"b"}))
        reply(state, "s3", 3, {"c"}, 2, frozenset({"b"}))
        assert detection(state, state.replies, SetType.REPLIES) == []

    def test_wrong_value_for_own_write(self, state):
        state.my_last_val = "a"
        state.my_last_ts = state.last_ts = 2
        reply(state, "s1", 2, {"a"})
        reply(state, "s2", 2, {"forged:z"})
        reply(state, "s3", 2, {"a"})
        assert detection(state, state.replies, SetType.REPLIES) == [Detection("s2", DetectionReason.WRONG_VALUE)]

    def test_missing_write_while_writing(self, state):
        state.writing = True
        state.my_last_val = "a"
        state.my_last_ts = 2
        reply(state, "s1", 2, {"a"}, 1, frozenset({"z"}))
        reply(state, "s2", 2, {"a"}, 1, frozenset({"z"}))
        reply(state, "s3", 1, {"z"})
        assert detection(state, state.replies, SetType.REPLIES) == [Detection("s3", DetectionReason.MISSING_WRITE)]

    def test_each_server_is_reported_once(self, state):
        state.last_ts = 1
        reply(state, "s1", 1, {"a"})
        reply(state, "s2", 1, {"a"})
        reply(state, "s3", 5, {"x"}, 4, frozenset({"y"}))
        found = detection(state, state.replies, SetType.REPLIES)
        assert [d.server for d in found] == ["s3"]

    def test_does_not_touch_client_state(self, state):
        state.last_ts = 1
        reply(state, "s1", 1, {"a"})
        detection(state, state.replies, SetType.REPLIES)
        assert state.honest == set(SERVERS)
