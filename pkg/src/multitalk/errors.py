"""Exception types shared across the package."""


class MultitalkError(Exception):
    """Base class for all package-specific errors."""


class PlanParseError(MultitalkError):
    """Raised when plan text cannot be parsed into actions."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message)


class MalformedAgentResponse(MultitalkError):
    """Agent response did not match the expected grammar, even after a retry."""


class BackendUnavailable(MultitalkError):
    """Transport-level failure talking to an agent backend.

    ``cause`` is one of "timeout", "auth", "quota", "transport".
    """

    def __init__(self, cause: str, message: str = ""):
        self.cause = cause
        super().__init__(message or cause)


class ScriptExhausted(MultitalkError):
    """A scripted backend was called more times than it has entries."""


class GuardMismatch(MultitalkError):
    """A scripted entry's guard did not match the incoming prompt."""


class PlacementInfeasible(MultitalkError):
    """Scene generation could not place all objects without overlap."""


class UnknownTask(MultitalkError):
    """Benchmark task id has no registered specification."""


class ConfigError(MultitalkError):
    """A config document or model file failed validation."""


class HumanTimeout(MultitalkError):
    """No human answer arrived within the channel's timeout."""
