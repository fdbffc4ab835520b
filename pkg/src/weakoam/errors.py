"""Exception types raised across the package."""


class WeakMeasurementError(Exception):
    """Base class for all errors raised by :mod:`weakoam`."""


class BadShape(WeakMeasurementError, ValueError):
    pass


class NotHermitian(WeakMeasurementError, ValueError):
    pass


class NotNormalized(WeakMeasurementError, ValueError):
    pass


class OrthogonalPostselection(WeakMeasurementError, ZeroDivisionError):
    """Pre- and post-selected states overlap less than the configured floor."""


class NonCommuting(WeakMeasurementError, ValueError):
    pass


class DegeneracyUnresolved(WeakMeasurementError, RuntimeError):
    pass


class ExtentTooSmall(WeakMeasurementError, ValueError):
    """The grid cannot hold the (shifted) pointer without truncating its tails."""


class AmplificationOutOfRange(ExtentTooSmall):
    pass


class PostselectionTooRare(WeakMeasurementError, ZeroDivisionError):
    pass


class DegenerateFit(WeakMeasurementError, ValueError):
    pass


class CalibrationMissing(WeakMeasurementError, RuntimeError):
    pass


class BadAxis(WeakMeasurementError, ValueError):
    pass
