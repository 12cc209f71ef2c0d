"""Exception and warning types raised by :mod:`isoprofile`."""


class IsoprofileError(Exception):
    """Base class for all package errors."""


class InvalidParams(IsoprofileError, ValueError):
    """The isoparametric data (g, m1, m2) is not admissible."""


class InvalidG(InvalidParams):
    pass


class OddGMultiplicityMismatch(InvalidParams):
    pass


class NonPositiveMultiplicity(InvalidParams):
    pass


class DomainError(IsoprofileError, ValueError):
    """A state lies outside the region where a formula is defined."""


class PoleError(DomainError):
    pass


class OutOfRange(DomainError):
    pass


class SymmetryUnavailable(IsoprofileError):
    pass


class NotAGraph(IsoprofileError):
    pass


class StepSizeUnderflow(IsoprofileError, ArithmeticError):
    """The adaptive step fell below the hard floor.

    The offending time and state are kept on the instance for diagnosis.
    """

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class EventNotConverged(IsoprofileError):
    pass


class BracketNotFound(IsoprofileError):
    pass


class ClosureError(IsoprofileError):
    pass


class WitnessNotFound(IsoprofileError):
    pass


class NonMonotoneWarning(UserWarning):
    """A spot check disagreed with the interval structure assumed by bisection."""
