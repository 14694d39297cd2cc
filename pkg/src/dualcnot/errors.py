"""Exception types raised across the package.

All of them derive from ``ValueError`` (or ``KeyError`` for label lookups) so
callers that only care about "bad input" can catch the builtin.
"""


class NumericalValidityError(ValueError):
    """A matrix or state failed a numerical validity check."""


class ShapeError(NumericalValidityError):
    pass


class SizeError(NumericalValidityError):
    pass


class NotPSDError(NumericalValidityError):
    pass


class UnitarityError(NumericalValidityError):
    pass


class CPTPError(NumericalValidityError):
    pass


class DomainError(ValueError):
    """A parameter lies outside its allowed range."""


class ConfigError(ValueError):
    pass


class UnsupportedError(ValueError):
    pass


class LabelError(KeyError):
    pass
