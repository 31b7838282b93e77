"""Exception and warning types raised by the solvers."""


class MultibarrierError(Exception):
    """Base class for all package errors."""


class DomainError(MultibarrierError, ValueError):
    """An argument falls outside the admissible domain of an operation."""


class SingularSystemError(MultibarrierError, ArithmeticError):
    """A linear system or interface matrix is numerically singular."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class OpaqueApproximationError(MultibarrierError, ArithmeticError):
    """The opaque factorization diverges (the frequency sits on a resonance)."""

    def __init__(self, message, denominator):
        super().__init__(message)
        self.denominator = denominator


class DecompositionSingularError(MultibarrierError, ArithmeticError):
    """The double-barrier partial decomposition cannot be inverted."""


class AmplitudeUnderflowError(MultibarrierError, ArithmeticError):
    """The transmitted amplitude is too small to carry a usable phase."""


class DivergentSeriesError(MultibarrierError, ArithmeticError):
    """A geometric series was requested with ratio magnitude >= 1."""


class ConditioningWarning(RuntimeWarning):
    """A single-region transfer matrix is badly conditioned."""


class OpaqueRegimeWarning(RuntimeWarning):
    """The barrier is too thin for the opaque formulas to be trusted."""


class NonRootWarning(RuntimeWarning):
    """A frequency passed as a resonance does not satisfy the resonance condition."""
