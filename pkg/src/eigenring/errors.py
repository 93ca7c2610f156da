"""Exception types shared across the library."""


class EigenringError(Exception):
    """Base class for all eigenring-specific errors."""


class SingularFactorError(EigenringError):
    """An inverse factor was numerically singular; the draw must be rejected."""


class IllConditionedSimilarityError(EigenringError):
    """Eigenvector matrix too ill-conditioned to enforce biorthonormality."""


class SingularKernelError(EigenringError):
    """The regularized hermitian kernel could not be factorized."""


class NotBracketedError(EigenringError):
    """Functional-equation residual has no sign change on (0, 1)."""


class OutsideSupportError(EigenringError):
    """Requested a ratio at a radius where the spectral density vanishes."""


class OverlapRangeError(EigenringError):
    """Overlap value incompatible with any radial cumulative distribution."""


class InsufficientSamplesError(EigenringError):
    """At least two Monte Carlo samples are needed for error bars."""


class EmptyBulkError(EigenringError):
    """No bin lies fully inside the bulk window."""


class ConfigError(EigenringError):
    """Invalid experiment configuration."""


class RejectionCapError(EigenringError):
    """A sample index exhausted its redraw budget."""
