"""Exception hierarchy for the stark package."""


class StarkError(Exception):
    """Base class for all stark errors."""


class DomainError(StarkError):
    """Input outside the supported domain (e.g. Bessel order beyond order_max)."""


class BranchPointError(StarkError):
    """Evaluation requested on a branch cut or at a branch point."""


class ContinuousSpectrumError(StarkError):
    """Physical-branch evaluation requested on the continuous spectrum (real axis)."""


class PoleError(StarkError):
    """Evaluation too close to a ladder pole; carries the offending index."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularKreinError(StarkError):
    """The Krein determinant vanishes (within tolerance) at the requested point."""


class StripError(StarkError):
    """Point outside the requested strip, or inside the edge exclusion zone."""


class StripEscapeError(StarkError):
    """A root search left the half-strip it was confined to."""


class ConvergenceError(StarkError):
    """Iteration failed to converge; carries the iterate trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class DegenerateMuError(StarkError):
    """Impurity level aligned with a band edge; mode selection ill-defined."""


class ModelInconsistencyError(StarkError):
    """Internal model self-checks failed (indicates a numerics bug)."""


class ValidationError(StarkError):
    """Invalid run configuration."""
