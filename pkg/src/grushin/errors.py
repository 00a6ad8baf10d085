"""Exception hierarchy shared by all modules."""


class GrushinError(Exception):
    """Base class for library errors."""


class DomainError(GrushinError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateInputError(DomainError):
    """Input that needs a different code path (e.g. a straight-line geodesic)."""


class CutLocusError(GrushinError):
    """The target point lies in the cut locus of the starting point."""


class ConvergenceError(GrushinError):
    """An iterative solver failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StepSizeError(ConvergenceError):
    """The adaptive integrator's step size collapsed."""
