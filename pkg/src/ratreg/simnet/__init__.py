"""Discrete-event simulation of the synchronous system model."""

from .engine import CLIENT_LABEL, Envelope, EventClass, EventQueue, Network, Process
from .timing import ChannelKind, DelayPolicy, TimingParams, VirtualTime
from .trace import TRACE_SCHEMA, Trace, TraceRecord

__all__ = [
    "CLIENT_LABEL",
    "ChannelKind",
    "DelayPolicy",
    "Envelope",
    "EventClass",
    "EventQueue",
    "Network",
    "Process",
    "TRACE_SCHEMA",
    "TimingParams",
    "Trace",
    "TraceRecord",
    "VirtualTime",
]
