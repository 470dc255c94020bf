"""Exception hierarchy shared by all radialwave modules."""


class RadialWaveError(Exception):
    """Base class for every error raised by the package."""


class DomainError(RadialWaveError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InterpolationError(RadialWaveError, ValueError):
    """A tabulated density was queried outside its table."""


class ConvergenceError(RadialWaveError, RuntimeError):
    """An iterative or integration procedure did not reach its tolerance."""


class SingularError(RadialWaveError, ArithmeticError):
    """A quantity is requested at a point where its formula degenerates."""


class RootError(RadialWaveError, RuntimeError):
    """A bracketing search failed to locate the requested roots."""


class ResolutionError(RadialWaveError, ValueError):
    """A sampling grid is too coarse for the requested spectral range."""


class TruncationError(RadialWaveError, ValueError):
    """A spectral integrand has not decayed at the end of the spectral grid."""


class TailError(RadialWaveError, ValueError):
    """Eigenseries coefficients have not decayed below the required level."""


class CFLError(RadialWaveError, ValueError):
    """The time step violates the stability bound of the explicit scheme."""


class BoundaryTouchError(RadialWaveError, RuntimeError):
    """The numerical solution reached the artificial outer boundary."""


class ConfigError(RadialWaveError, ValueError):
    """A scenario or model configuration is malformed."""
