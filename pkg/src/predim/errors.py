"""Exception hierarchy shared by all predim modules."""


class PredimError(Exception):
    """Base class for all library errors."""


class UnknownElement(PredimError):
    """An element id is not part of the structure it was used with."""


class SetsNotDisjoint(PredimError):
    """Cross-counting was asked for overlapping element sets."""


class BaseMismatch(PredimError):
    """Free amalgamation: the two structures disagree on the shared base."""


class OverlapViolation(PredimError):
    """Free amalgamation: the structures overlap outside the declared base."""


class NotStrong(PredimError):
    """An operation required a strong substructure and did not get one."""


class BudgetExceeded(PredimError):
    """An exhaustive search ran past its configured node budget."""

    def __init__(self, message: str = "search budget exceeded", spent: int | None = None):
        super().__init__(message)
        self.spent = spent


class InsufficientPrecision(PredimError):
    """A comparison threshold fell strictly inside a declared-irrational
    alpha interval; the caller must narrow the interval to proceed."""

    def __init__(self, threshold=None):
        msg = "alpha interval too wide to resolve comparison"
        if threshold is not None:
            msg += f" (threshold {threshold})"
        super().__init__(msg)
        self.threshold = threshold


class AlphaOutOfRange(PredimError):
    """Alpha is outside the range an operation supports."""


class RangeViolation(PredimError):
    """A construction step would leave the admissible relative-dimension
    range (result at or below -1)."""


class Unachievable(PredimError):
    """The request is provably impossible, e.g. a target interval missed
    by the rational value lattice."""


class ProbabilityOverflow(PredimError):
    """Edge probability c * n**(-alpha) exceeds 1."""


class UsageError(PredimError):
    """Malformed CLI arguments or input files."""
