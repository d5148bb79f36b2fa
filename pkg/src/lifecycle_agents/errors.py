"""Exception hierarchy shared across the package."""


class LifecycleError(Exception):
    """Base class for all package errors."""


class DomainError(LifecycleError, ValueError):
    """An argument lies outside the domain of the function (e.g. c <= 0)."""


class InfeasibleEnvironmentError(LifecycleError, ValueError):
    """Lifetime resources are not strictly positive."""


class UndefinedMetricError(LifecycleError, ValueError):
    """A metric cannot be computed because there are too few valid trials."""


class ConfigError(LifecycleError, ValueError):
    """A configuration file or plan is malformed."""


class ProviderError(LifecycleError):
    """A live provider request failed.

    ``attempts`` and ``status_code`` carry the retry metadata so callers can
    record them on the failed trial.
    """

    def __init__(self, message: str, *, provider: str = "", attempts: int = 0,
                 status_code: int | None = None):
        super().__init__(message)
        self.provider = provider
        self.attempts = attempts
        self.status_code = status_code


class ProviderAuthError(ProviderError):
    """Credentials are missing or were rejected."""


class RateLimitError(ProviderError):
    """The provider kept returning 429 after all retries."""


class RunAbortedError(LifecycleError):
    """Every trial of at least one agent failed."""
