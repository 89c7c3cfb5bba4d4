"""Exception types raised by the piht package."""


class PihtError(Exception):
    """Base class for all piht errors."""


class InvalidInputError(PihtError, ValueError):
    """An argument violates a documented precondition."""


class InfeasibleError(PihtError, ValueError):
    """A point has more nonzeros than the sparsity level allows."""


class DomainError(PihtError, ValueError):
    """An objective was evaluated outside its domain (e.g. a nonpositive GGM diagonal)."""


class BudgetExceededError(PihtError, RuntimeError):
    """The exhaustive oracle refused an instance that is too large to enumerate."""


class SolverAbort(PihtError, RuntimeError):
    """A solver iteration produced a non-finite estimate.

    The partially filled iteration record is attached as ``record``.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class ConfigError(PihtError, ValueError):
    """An experiment configuration could not be parsed or validated."""
