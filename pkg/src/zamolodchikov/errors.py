"""Exception hierarchy shared by all modules."""


class ZamolodchikovError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ZamolodchikovError, ValueError):
    """An argument lies outside the domain of a function (e.g. modulus k >= 1)."""


class PoleError(ZamolodchikovError, ArithmeticError):
    """A denominator fell below the pole threshold.

    ``where`` holds the offending argument so callers can report or replay it.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class InvalidTriangleError(ZamolodchikovError, ValueError):
    """Three angles do not form an admissible spherical triangle."""


class ConstraintError(ZamolodchikovError, ValueError):
    """A linear or algebraic constraint on the angles is violated."""


class GaugeError(ZamolodchikovError, ValueError):
    """A gauge parameter makes the similarity transformation singular."""


class ExhaustionError(ZamolodchikovError, RuntimeError):
    """A seeded generator ran out of its resample budget."""


class InversionError(ZamolodchikovError, RuntimeError):
    """Angle -> elliptic parameter inversion failed."""


class NoConvergenceError(InversionError):
    """No Newton start converged to a root inside the periodicity rectangle."""


class AmbiguityError(InversionError):
    """Zero or several branches reproduce the target angle."""
