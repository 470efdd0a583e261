"""Exception types shared across the package."""


class VortexSurfError(Exception):
    """Base class for all package errors."""


class SingularMapError(VortexSurfError):
    """A holomorphic map is not conformal at the requested point."""


class InvalidMetricError(VortexSurfError):
    """Metric density is nonpositive or otherwise unusable."""


class CoincidentPointsError(VortexSurfError):
    """Two points that must be distinct are numerically coincident."""


class CollisionError(VortexSurfError):
    """Vortex positions fell below the minimum separation."""


class VortexOnCycleError(VortexSurfError):
    """A vortex sits too close to a homology cycle for quadrature."""


class QuadratureError(VortexSurfError):
    """A quadrature did not converge to the requested tolerance."""


class StepFailureError(VortexSurfError):
    """Time integration could not complete a step."""


class ChartError(VortexSurfError):
    """A point is outside the atlas or charts are incompatible."""


class ConfigError(VortexSurfError):
    """An experiment configuration is malformed."""
