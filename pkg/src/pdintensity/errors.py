"""Exception types raised across the package."""


class PDError(ValueError):
    """Base class for all package errors."""


class InvalidDiagram(PDError):
    pass


class EmptyCloud(PDError):
    pass


class DimensionMismatch(PDError):
    pass


class TooLarge(PDError):
    pass


class EmptyDiagramInSample(PDError):
    """A normalized quantity was requested for a sample holding an empty diagram."""

    def __init__(self, index):
        self.index = index
        super().__init__(f"diagram {index} of the sample is empty")


class ResolutionTooCoarse(PDError):
    pass


class GridMismatch(PDError):
    pass


class NegativeDensity(PDError):
    pass


class SolverLimit(PDError):
    pass


class InvalidQ(PDError):
    pass


class DegenerateSweep(PDError):
    pass


class NonPositiveInput(PDError):
    pass
