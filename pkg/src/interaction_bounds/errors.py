"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input violates a documented precondition or invariant."""


class UnsupportedRangeError(ValueError):
    """The parameters lie outside the range where a known result applies."""


class BracketError(RuntimeError):
    """A root could not be bracketed or the bracket expansion gave up."""


class PropertyViolation(AssertionError):
    """A numerically checked mathematical property failed."""
