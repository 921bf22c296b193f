"""Exception types raised across the package."""


class QSwitchError(Exception):
    """Base class for all errors raised by :mod:`qswitch`."""


class DimensionError(QSwitchError, ValueError):
    """Operand shapes do not agree with each other or with a layout."""


class DomainError(QSwitchError, ValueError):
    """An angle or coherence value lies outside its allowed range."""


class NotNormalizedError(QSwitchError, ValueError):
    """A state vector that must have unit norm does not."""


class CompletenessError(QSwitchError):
    """A Kraus set fails sum(E^dag E) == I."""


class DegeneratePostselection(QSwitchError, ArithmeticError):
    """The selected measurement outcome has (numerically) zero probability."""


class QuadratureError(QSwitchError, ArithmeticError):
    """An integrand returned a non-finite value at a quadrature node."""
