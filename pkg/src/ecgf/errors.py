"""Exception hierarchy shared by every module.

The CLI maps DomainError to exit status 2 and ResourceError to 3.
"""


class EcgfError(Exception):
    pass


class DomainError(EcgfError, ValueError):
    """Input outside the region where an operation is defined or supported."""


class PoleError(DomainError):
    pass


class MissingDataError(DomainError):
    """Reduction data for a prime must be supplied but was not."""


class ConfigError(DomainError):
    pass


class ConditioningError(DomainError):
    """Evaluation refused because a divisor is numerically too close to zero."""


class ResourceError(EcgfError, RuntimeError):
    """Enumeration or iteration budget exceeded."""


class InconsistencyError(EcgfError, ArithmeticError):
    """Two computations that must agree exactly did not."""
