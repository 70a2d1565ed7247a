"""Exception types raised by the solver stack."""


class TFGPError(Exception):
    """Base class for all library errors."""


class InvalidRegime(TFGPError):
    """Parameters outside the regime where both components are disk supported."""


class DegenerateCase(TFGPError):
    """Parameters reduce the problem to the scalar equation (rejected)."""


class NewtonDiverged(TFGPError):
    """Damped Newton failed to reach the requested tolerance."""

    def __init__(self, message, trace=None, last_iterate=None):
        super().__init__(message)
        self.trace = list(trace or [])
        self.last_iterate = last_iterate


class SingularSystem(TFGPError):
    """A discretized linear operator could not be inverted."""


class NearOriginBlowup(TFGPError):
    """Outer functions were evaluated below the tabulated z range."""


class GridMismatch(TFGPError):
    """Two fields that must share a grid do not."""


class NegativeLambda(TFGPError):
    """The truncated inner lambda sum is not positive where it is needed."""


class NonPositive(TFGPError):
    """A converged iterate changes sign in the interior."""


class DegenerateFit(TFGPError):
    """A log-log fit cannot be formed from the given data."""


class ConfigError(TFGPError):
    """Malformed or inconsistent run configuration."""
