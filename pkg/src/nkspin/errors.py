"""Exception hierarchy shared by all modules.

The CLI maps DegeneracyError to its own exit code, so numerical
degeneracies must never be raised as plain ValueError.
"""


class GeometryError(Exception):
    """Base class for all library errors."""


class DomainError(GeometryError, ValueError):
    """Input outside the mathematical domain of an operation."""


class BranchError(DomainError):
    """Logarithm requested at the branch point (the antipode of 1)."""


class ConfigurationError(GeometryError):
    """Analytic derivative requested but none was registered."""


class DegeneracyError(GeometryError):
    """A field, frame or immersion degenerates numerically."""


class ConsistencyError(GeometryError):
    """An internal exactness check failed beyond tolerance."""
