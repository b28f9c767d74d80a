"""Exception hierarchy for ratreg."""


class RatregError(Exception):
    """Base class for every error raised by ratreg."""


class InvalidParameterError(RatregError, ValueError):
    """A game or model parameter is outside its allowed range."""


class ModelViolationError(RatregError):
    """A request breaks the synchronous system model (delay bounds, timers in the past)."""


class ProtocolMisuseError(RatregError):
    """An operation was invoked while another one is still running at the same client."""


class ScenarioError(RatregError):
    """A scenario document is invalid; the message names the violated clause."""


class LivelockError(RatregError):
    """The engine kept processing events without the clock advancing."""
