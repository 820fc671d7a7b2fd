"""Exception types shared across the library."""


class HybridPdeError(Exception):
    """Base class for all library errors."""


class NonFiniteFieldError(HybridPdeError):
    """A field contains NaN or Inf on active cells."""


class GridMismatchError(HybridPdeError):
    """Two grids (or a field and a grid) are incompatible."""


class NoSpectralSplitError(HybridPdeError):
    """The PDE has no Fourier linear/nonlinear splitting."""


class CoefficientOverflowError(HybridPdeError):
    """Exponential integrator coefficients came out non-finite."""


class SolverDivergedError(HybridPdeError):
    """High-fidelity stepping blew up (norm growth beyond tolerance)."""


class SurrogateDivergedError(HybridPdeError):
    """Surrogate produced a non-finite state."""


class TrajectoryGapError(HybridPdeError):
    """Consecutive states do not line up in time or on the grid."""


class EmptyDomainError(HybridPdeError):
    """Operation requires at least one active cell."""


class InsufficientRankError(HybridPdeError):
    """Snapshot data cannot support the requested basis size."""


class UndefinedCorrelationError(HybridPdeError):
    """Pearson correlation of a constant series is undefined."""


class DegenerateReferenceError(HybridPdeError):
    """Relative error against an identically zero reference."""


class EstimatorCorruptError(HybridPdeError):
    """The running error estimate became non-finite."""
