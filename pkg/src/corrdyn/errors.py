"""Exception types shared across the package."""


class CorrdynError(Exception):
    """Base class for package errors."""


class DomainError(CorrdynError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ResourceCapError(CorrdynError):
    """A requested computation exceeds a configured size cap."""


class TruncationError(CorrdynError):
    """A hierarchy term requires a component above the sequence truncation."""


class IntegrationError(CorrdynError):
    """Time integration produced non-finite values."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


class ConfigError(CorrdynError):
    """A scenario configuration failed to parse or validate."""
