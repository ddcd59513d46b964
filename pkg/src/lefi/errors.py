"""Exception types raised across the package."""


class LefiError(Exception):
    """Base class for all package errors."""


class DomainError(LefiError, ValueError):
    """An input lies outside the domain of a model function."""


class InfeasibleProfileError(LefiError, ValueError):
    """A client's feasible data-size interval is empty."""


class GPRFitError(LefiError):
    """Covariance factorization failed even after jitter escalation."""


class NotFittedError(LefiError, RuntimeError):
    """A surrogate was used before being fitted."""


class ConfigError(LefiError, ValueError):
    """Scenario or CLI configuration is invalid."""
