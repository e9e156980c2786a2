"""Exception hierarchy shared by every sqem module."""


class SqemError(Exception):
    """Base class for all sqem errors."""


class ValidationError(SqemError, ValueError):
    """An input violates a documented invariant."""


class ParseError(ValidationError):
    """A text document could not be parsed.

    ``line`` is 1-based and ``field`` names the offending token when known.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        locus = []
        if line is not None:
            locus.append(f"line {line}")
        if field is not None:
            locus.append(f"field {field!r}")
        if locus:
            message = f"{message} ({', '.join(locus)})"
        super().__init__(message)


class UnsupportedSizeError(SqemError):
    """A dense computation was requested for too many qubits."""


class DegenerateDistributionError(SqemError, ValueError):
    """A distribution has no positive mass to normalize."""


class CheckInfeasibleError(SqemError):
    """No valid Z check exists for the requested qubit."""


class InfeasibleCutError(SqemError):
    """The requested cuts do not split the circuit into two fragments."""


class CombinatorialBudgetError(SqemError):
    """Too many cuts for the configured variant budget."""


class EmptyPostSelectionError(SqemError):
    """No probability mass survived post-selection."""


class PlanningError(SqemError):
    """Cut placement for a check sandwich could not be determined."""


class ExecutionError(SqemError):
    """A backend failed while executing a fragment configuration."""
