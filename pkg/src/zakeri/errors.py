"""Exception types shared across modules.

``DomainError`` and its subclasses mean the mathematics refused the input
(escaping orbit, unresolved location, ...).  The CLI maps them to exit code 2.
"""


class DomainError(Exception):
    pass


class EscapeError(DomainError):
    """A critical orbit left every bounded region: parameter outside the connectedness locus."""


class PoleError(DomainError, ArithmeticError):
    pass


class UnresolvedError(DomainError):
    """A query needs more resolution (depth, samples, series accuracy) than is available."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class PullbackError(UnresolvedError):
    """Branch continuation could not decide between nearby preimages."""
