"""Exception types raised across the package."""


class RaysplitError(Exception):
    """Base class for all package errors."""


class NonConvex(RaysplitError):
    """Curvature vanished or changed sign where strict convexity is required."""


class InsidePoint(RaysplitError):
    """A point that must lie outside a curve lies inside or on it."""


class NonPositiveSpeed(RaysplitError):
    pass


class SpeedOrder(RaysplitError):
    pass


class GrazingOuter(RaysplitError):
    """An interior ray touched the outer boundary tangentially."""


class NotOnBoundary(RaysplitError):
    pass


class EventBudget(RaysplitError):
    """The event cap was exhausted before a computation could finish."""


class NoTangencyRoot(RaysplitError):
    pass


class IterationBudget(RaysplitError):
    pass


class NotGammaX0Form(RaysplitError):
    pass


class NotOuterPoint(RaysplitError):
    pass


class EmptyComplement(RaysplitError):
    pass


class DegenerateGeometry(RaysplitError):
    pass


class TooLong(RaysplitError):
    pass


class NotInThirdQuadrant(RaysplitError):
    pass


class NotEllipse(RaysplitError):
    pass


class ConfigError(RaysplitError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")
