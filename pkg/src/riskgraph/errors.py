"""Exception hierarchy shared across the package.

CLI exit codes map onto these classes: data/input problems exit 1,
configuration problems exit 2, internal invariant violations exit 3.
"""


class RiskGraphError(Exception):
    """Base class for all package errors."""


class LoadError(RiskGraphError):
    """A required input file is missing or unreadable."""


class FormatError(RiskGraphError):
    """A record or file violates its declared format."""


class IntegrityError(RiskGraphError):
    """Cross-record references are inconsistent (dangling ids, bad splits)."""


class ConfigError(RiskGraphError):
    """A configuration value or file is invalid."""


class InternalError(RiskGraphError):
    """An internal invariant was violated; indicates a bug, not bad input."""
