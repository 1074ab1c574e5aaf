"""Exception hierarchy shared by all modules."""


class OutlierMBCError(Exception):
    """Base class for every error raised by this package."""


class DomainError(OutlierMBCError, ValueError):
    """An argument lies outside the domain of the operation."""


class NotPositiveDefinite(OutlierMBCError, ArithmeticError):
    """Cholesky factorization failed even after ridge repair."""


class NumericalError(OutlierMBCError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class EmptyComponent(OutlierMBCError):
    """A mixture component's effective size fell below p + 2."""


class DegenerateComponent(OutlierMBCError):
    """A component is too small for its Beta reference to exist."""


class TooFewPoints(OutlierMBCError, ValueError):
    """Fewer observations than requested groups."""


class InfeasibleBudget(OutlierMBCError, ValueError):
    """The outlier budget leaves too few points to fit every step."""


class NoValidStep(OutlierMBCError):
    """A dissimilarity trace contains no valid step."""


class InvalidStep(OutlierMBCError, ValueError):
    """A requested step of the trace is out of range or invalid."""


class UnknownScenario(OutlierMBCError, ValueError):
    """Unrecognized simulation scenario identifier."""


class RejectionStall(OutlierMBCError):
    """Rejection sampling hit its proposal cap."""


class ParseError(OutlierMBCError, ValueError):
    """Malformed CSV input; carries the offending location."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class MonotonicityError(AssertionError):
    """EM log-likelihood decreased by more than the allowed slack."""
