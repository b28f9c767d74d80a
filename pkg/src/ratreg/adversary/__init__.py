"""Server behaviours: honest, crashing, scripted and rational malicious."""

from .controller import (
    Forger,
    HonestBehaviour,
    RationalBehaviour,
    ScriptedBehaviour,
    behaviour_for,
    choose_strategy,
    corrupt_ack,
    corrupt_reply,
)
from .ledger import PayoffLedger, ReadInteraction, ServerTally, settle_reads
from .profiles import CorruptionAction, MessageTarget, ProfileKind, RequestKind, ScriptRule, ServerProfile

__all__ = [
    "CorruptionAction",
    "Forger",
    "HonestBehaviour",
    "MessageTarget",
    "PayoffLedger",
    "ProfileKind",
    "RationalBehaviour",
    "ReadInteraction",
    "RequestKind",
    "ScriptRule",
    "ScriptedBehaviour",
    "ServerProfile",
    "ServerTally",
    "behaviour_for",
    "choose_strategy",
    "corrupt_ack",
    "corrupt_reply",
    "settle_reads",
]
