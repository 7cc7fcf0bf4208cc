"""Exception types shared across the package."""


class DomainRangeError(ValueError):
    """An argument lies outside the admissible range of the operation."""


class DegenerateInputError(ValueError):
    """Input yields a degenerate quotient (e.g. zero weighted mass)."""


class GridMismatchError(ValueError):
    """Two sampled functions do not share a compatible grid."""


class ConstructionError(ValueError):
    """A test-function or mesh construction cannot fit inside its domain."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-finite values, bad conditioning)."""


class NonConvergenceError(NumericalError):
    """An iterative solver exhausted its iteration budget."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class AssemblyError(NumericalError):
    """Finite element assembly encountered a non-finite quantity."""
