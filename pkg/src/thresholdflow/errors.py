"""Exception types shared across the package.

Every error raised by the library derives from ThresholdFlowError so callers
can catch the whole family at once; the CLI maps them to exit codes.
"""


class ThresholdFlowError(Exception):
    """Base class for all library errors."""


class DimensionError(ThresholdFlowError):
    """Matrix or grid input has the wrong shape or symmetry."""


class ScaleOrderError(ThresholdFlowError):
    """Kernel time scales must satisfy gamma > beta > 0."""


class InadmissibleMaterialError(ThresholdFlowError):
    """Material matrices admit no valid kernel scales.

    Carries the failing ValidationReport in ``report`` when one exists.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ValidationError(ThresholdFlowError):
    """Kernel coefficients were not validated, or validation failed."""


class NonpositiveTimeError(ThresholdFlowError):
    """Gaussian convolution requires a strictly positive time."""


class ResolutionError(ThresholdFlowError):
    """Kernel width is below the hard resolution floor of the grid."""


class ResolutionWarning(UserWarning):
    """Kernel width is under-resolved on this grid (soft warning)."""


class PartitionError(ThresholdFlowError):
    """Per-phase fields do not form a partition of unity."""


class NegativeSquareError(ThresholdFlowError):
    """Squared distance evaluated significantly below zero.

    Signals that the coefficient matrices are not conditionally positive
    definite, so the induced distance is not a metric.
    """


class EnumerationTooLarge(ThresholdFlowError):
    """Exhaustive oracle case exceeds the enumeration guard."""


class EmptyPhase(ThresholdFlowError):
    """A measurement was requested for a phase with zero volume."""


class InadmissibleTensions(ThresholdFlowError):
    """Three surface tensions violate the triangle inequality."""


class WindowTooShort(ThresholdFlowError):
    """Shrink-rate fit window has fewer than 10 usable samples."""


class NotShrinking(ThresholdFlowError):
    """Phase volume is not monotonically shrinking over the fit window."""


class ConfigError(ThresholdFlowError):
    """Run configuration is malformed or semantically invalid."""
