"""Exception hierarchy shared by all modules."""


class KitaevError(Exception):
    """Base class for every error raised by this package."""


class DegeneratePolynomialError(KitaevError, ValueError):
    """Polynomial is constant or identically zero where roots are required."""


class PreconditionError(KitaevError, ValueError):
    """Inputs violate a documented precondition of an operation."""


class SingularInputError(KitaevError, ValueError):
    """A normalisation or denominator vanishes for the given parameters."""


class StructureError(KitaevError):
    """Numerical data does not have the algebraic structure an operation relies on."""


class UnsupportedStructureError(StructureError):
    """Bistritz recursion hit a singular pattern it does not handle."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NumericalFailure(KitaevError, RuntimeError):
    """An underlying numerical routine failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
