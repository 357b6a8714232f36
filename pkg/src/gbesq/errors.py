"""Exception hierarchy shared across the package."""


class GbesqError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GbesqError, ValueError):
    """Invalid mathematical input (wrong range, bad measure support, ...)."""


class InversionError(GbesqError, RuntimeError):
    """Numerical Laplace inversion or root bracketing failed."""


class TruncationError(GbesqError, RuntimeError):
    """A certified series truncation bound could not be met."""


class ConfigError(GbesqError, ValueError):
    """Scenario configuration is malformed or inconsistent."""
