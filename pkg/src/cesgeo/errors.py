"""Exception hierarchy shared across the package."""


class CesGeoError(Exception):
    """Base class for all errors raised by cesgeo."""


class NotHermitian(CesGeoError):
    """Matrix asymmetry exceeds the symmetrization tolerance."""


class NotPositiveDefinite(CesGeoError):
    """Smallest eigenvalue fails the positive-definiteness test."""


class ConvergenceFailure(CesGeoError):
    """Iterative eigensolver did not converge."""


class DomainError(CesGeoError):
    """Scalar function applied outside its domain (e.g. log of a non-positive eigenvalue)."""


class DimensionMismatch(CesGeoError):
    """Operands have incompatible dimensions."""


class InvalidMetricParams(CesGeoError):
    """Metric coefficients violate alpha > 0 or beta > -alpha/p."""


class LeftCone(CesGeoError):
    """A first-order retraction step left the positive definite cone."""


class InsufficientSamples(CesGeoError):
    """Sample size too small for the requested estimator (n <= p)."""


class NoConvergence(CesGeoError):
    """Iteration cap reached before the convergence criterion was met."""


class EmptyClass(CesGeoError):
    """A training class contains no examples."""


class NumericalRankLoss(CesGeoError):
    """Gram-Schmidt pivot norm fell below tolerance."""


class SingularFim(CesGeoError):
    """Fisher information matrix is numerically singular."""


class FileFormatError(CesGeoError):
    """Malformed matrix, batch, or config file."""
