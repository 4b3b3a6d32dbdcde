"""Exception hierarchy for interference alignment runs."""

from __future__ import annotations


class IaError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(IaError, ValueError):
    """Raised when configuration or command-line input is invalid."""


class CapExceededError(IaError, ValueError):
    """Raised when a symbol extension exceeds the numeric construction cap."""

    def __init__(self, mu: int, cap: int) -> None:
        super().__init__(f"extension length {mu} exceeds cap {cap}")
        self.mu = mu
        self.cap = cap


class ResampleAdvisedError(IaError, RuntimeError):
    """Raised when a random draw hit a (probability-zero) degenerate event."""


class SeparabilityError(IaError, RuntimeError):
    """Raised when desired signals cannot be separated from interference."""


class ChannelDumpError(IaError, ValueError):
    """Raised when a serialized channel dump is malformed."""
