"""Exception types raised by attractor-lab.

Every error also derives from the closest builtin exception, so callers can
catch ``ValueError``/``RuntimeError``/``IndexError`` without importing this
module.
"""


class AttractorLabError(Exception):
    """Base class for all attractor-lab errors."""


class ConfigurationError(AttractorLabError, ValueError):
    """Invalid grid, nonlinearity, evolution or run configuration."""


class SpectralIndexError(AttractorLabError, IndexError):
    """Multi-index outside the truncated mode range."""


class PreconditionError(AttractorLabError, ValueError):
    """An operation was called outside its stated precondition."""


class CertificateUnavailableError(AttractorLabError, RuntimeError):
    """No admissible t_star exists for the supplied decay function."""


class DegenerateCertificateError(AttractorLabError, ValueError):
    """Certificate with R_star = 0 used where a logarithm of R_star is needed."""


class InstabilityError(AttractorLabError, RuntimeError):
    """Trajectory left the divergence guard ball."""


class ConsistencyError(AttractorLabError, RuntimeError):
    """A decomposition identity drifted beyond tolerance."""


class InsufficientDataError(AttractorLabError, ValueError):
    """Too few usable samples for a fit or an empty ensemble."""


class NumericalError(AttractorLabError, RuntimeError):
    """An iterative numerical procedure failed to converge."""


class UndefinedDistanceError(AttractorLabError, ValueError):
    """Distance to an empty set was requested."""
