"""Exception hierarchy shared across the package.

The split mirrors the command-line exit codes: validation problems are the
caller's fault (bad arguments, malformed literals, preconditions), numeric
range problems mean the requested computation left the representable range
(native exponent budget, tower levels where a native float is required,
argument precision exhausted).
"""


class ExpdynError(Exception):
    """Base class for package errors."""


class ValidationError(ExpdynError):
    """Input violates a documented precondition."""


class DomainError(ValidationError):
    """Mathematically undefined request (inverse branch at 0, log of 0)."""


class NumericRangeError(ExpdynError):
    """Result or intermediate left the representable numeric range."""


class UntrustedArgumentError(NumericRangeError):
    """Angular precision was exhausted before the requested depth."""


class NonConvergenceError(NumericRangeError):
    """An iterative procedure failed its self-consistency check."""


class GeometryError(ValidationError):
    """Induced-map geometry could not be constructed at these parameters."""
