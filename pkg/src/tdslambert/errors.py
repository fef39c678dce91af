"""Exception hierarchy shared by the library and the command-line tool."""


class TDSError(Exception):
    """Base class for all library errors."""


class SingularMatrixError(TDSError):
    """A matrix is singular to working tolerance."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(f"{message} (condition number ~ {condition:.3e})")
        self.condition = condition


class ConvergenceError(TDSError):
    """An iterative method failed to converge within its budget."""


class DomainError(TDSError, ValueError):
    """An argument lies outside the domain of the requested function branch."""


class UncontrollableError(TDSError):
    """The pair (A, b) is not controllable."""

    def __init__(self, rank, order):
        super().__init__(f"pair (A, b) is uncontrollable: rank {rank} of {order}")
        self.rank = rank
        self.order = order


class BudgetExhaustedError(TDSError):
    """A subdivision or refinement budget ran out."""
