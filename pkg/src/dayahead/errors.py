"""Exception hierarchy.

Every error raised by the package derives from :class:`DayAheadError` so that
callers (and the CLI) can catch one type.  Subclasses also inherit from the
closest builtin so ``except ValueError`` keeps working.
"""


class DayAheadError(Exception):
    pass


class RangeError(DayAheadError, ValueError):
    pass


class AlignmentError(DayAheadError, ValueError):
    pass


class ConfigError(DayAheadError, ValueError):
    pass


class ParseError(DayAheadError, ValueError):
    pass


class DataQualityError(DayAheadError, ValueError):
    pass


class OrderingError(DayAheadError, ValueError):
    pass


class DatasetError(DayAheadError, ValueError):
    pass


class ShapeError(DayAheadError, ValueError):
    pass


class NumericError(DayAheadError, ArithmeticError):
    pass


class StateError(DayAheadError, RuntimeError):
    pass


class TrainingError(DayAheadError, RuntimeError):
    pass


class MetricError(DayAheadError, ZeroDivisionError):
    pass


class ReportError(DayAheadError, ValueError):
    pass


class LeakageError(DayAheadError, AssertionError):
    """Internal consistency failure: a training sample saw data past its cutoff."""
