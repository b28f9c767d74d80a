"""Client and server automata of the register emulation.

The automata live in ``ratreg.register.client`` and ``ratreg.register.server``;
this package exports the message and state types they share with the variants.
"""

from .messages import (
    FORGED_PREFIX,
    CheckReply,
    CheckTs,
    Detected,
    Message,
    Read,
    ReadAck,
    RegisterValue,
    Reply,
    ServerId,
    Timestamp,
    ValueSet,
    Write,
    WriteAck,
)
from .state import ClientState, OutcomeKind, ProtocolKind, ReadOutcome, ServerState
from .detection import Detection, DetectionReason, SetType, detection

__all__ = [
    "CheckReply",
    "CheckTs",
    "ClientState",
    "Detected",
    "Detection",
    "DetectionReason",
    "FORGED_PREFIX",
    "Message",
    "OutcomeKind",
    "ProtocolKind",
    "Read",
    "ReadAck",
    "ReadOutcome",
    "RegisterValue",
    "Reply",
    "ServerId",
    "ServerState",
    "SetType",
    "Timestamp",
    "ValueSet",
    "Write",
    "WriteAck",
    "detection",
]
