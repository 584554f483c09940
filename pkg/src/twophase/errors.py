"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class;
all of them derive from TwoPhaseError so a single except clause can catch
package-level failures without swallowing genuine bugs.
"""


class TwoPhaseError(Exception):
    """Base class for all package errors."""


class InvalidArgument(TwoPhaseError, ValueError):
    """An argument is outside its documented domain (t <= 0, sigma <= 0, ...)."""


class QuadratureFailure(TwoPhaseError, RuntimeError):
    """Adaptive quadrature exhausted its refinement budget."""


class ConsistencyError(TwoPhaseError, RuntimeError):
    """Two independent evaluation routes disagree beyond tolerance."""


class DegenerateFit(TwoPhaseError, RuntimeError):
    """All samples underflowed; no envelope can be fitted."""


class FitUnstable(TwoPhaseError, RuntimeError):
    """A regression's residual is too large relative to the fitted term."""


class OutsideTubularNeighborhood(TwoPhaseError, ValueError):
    """Query point lies outside the declared tube of the surface."""


class AmbiguousProjection(TwoPhaseError, RuntimeError):
    """Two distinct nearest surface points were detected."""


class OnSurface(TwoPhaseError, ValueError):
    """The requested quantity is only defined off the surface (side limits exist)."""


class DegenerateTube(TwoPhaseError, ValueError):
    """A factor 1 - kappa*delta is nonpositive: the point is past a focal point."""


class StencilOutOfTube(TwoPhaseError, ValueError):
    """A finite-difference stencil left the tubular neighborhood."""


class ThresholdNotFound(TwoPhaseError, RuntimeError):
    """No admissible rate threshold was found below the search cap."""


class SandwichTooLoose(TwoPhaseError, RuntimeError):
    """The barrier gap exceeds the quantity it is meant to resolve."""


class UnsupportedGeometry(TwoPhaseError, ValueError):
    """The operation only supports its documented model geometries."""


class InsufficientHorizon(TwoPhaseError, ValueError):
    """The time series is too short for the requested transform accuracy."""


class NonConvergence(TwoPhaseError, RuntimeError):
    """An iterative linear solve did not reach its tolerance."""


class ConfigError(TwoPhaseError, ValueError):
    """A run configuration failed schema validation."""
