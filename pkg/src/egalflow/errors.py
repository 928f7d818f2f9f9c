"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class EgalflowError(Exception):
    """Base class for every error raised by this package."""


class InvariantViolation(EgalflowError):
    """An internal invariant failed. Always a bug, never bad input."""


# flowcore


class Infeasible(EgalflowError):
    """No flow satisfies the bounds.

    ``cut`` is a node set ``X`` whose entering lower bounds exceed the
    capacity of the edges leaving it, i.e. ``deficiency > 0``. It may be
    ``None`` when an edge has an empty bound interval.
    """

    def __init__(self, message, cut=None, deficiency=None):
        super().__init__(message)
        self.cut = cut
        self.deficiency = deficiency


class UnboundedFlow(EgalflowError):
    pass


class UnboundedObjective(EgalflowError):
    pass


class CyclicSupport(EgalflowError):
    pass


class NotFound(EgalflowError):
    pass


# exchange


class ValidationError(EgalflowError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class TradeStructureError(ValidationError):
    pass


class UnknownPlayer(EgalflowError):
    pass


class TooManyPlayers(EgalflowError):
    pass


# sharing / egalitarian


class EmptySolution(EgalflowError):
    pass


class DimensionMismatch(EgalflowError):
    pass


class InfeasiblePinned(InvariantViolation):
    pass


class AmbiguousMaximizer(EgalflowError):
    def __init__(self, message, coalitions=()):
        super().__init__(message)
        self.coalitions = list(coalitions)
