"""Exception hierarchy shared by all subpackages."""


class FluidLawsError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(FluidLawsError, ValueError):
    """Invalid metric, singular chart point, or degenerate polyline."""


class StateError(FluidLawsError, ValueError):
    """Non-positive density, non-finite fields, or malformed state."""


class NumericError(FluidLawsError, ArithmeticError):
    """A quadrature or iterative procedure failed to converge."""


class ClassificationError(FluidLawsError, ValueError):
    """A density is paired with an equation of state or geometry that cannot conserve it."""


class CFLError(FluidLawsError, ValueError):
    """Time step exceeds the stability bound."""

    def __init__(self, message: str, suggested_dt: float):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class MarkerLostError(FluidLawsError, RuntimeError):
    """A marker left a non-periodic chart domain or got too close to its edge."""


class SeriesError(FluidLawsError, ValueError):
    """A time series is too short or inconsistently sampled."""
