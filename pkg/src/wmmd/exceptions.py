"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`WmmdError`, so callers
(including the CLI) can catch one base class. ``LabelError`` additionally
derives from ``IndexError`` because it signals an out-of-range class index.
"""


class WmmdError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(WmmdError):
    """Operand dimensions are inconsistent."""


class ParameterError(WmmdError):
    """A configuration value is outside its legal range."""


class DataError(WmmdError):
    """A dataset is empty, too small, or otherwise unusable."""


class NumericError(WmmdError):
    """A non-finite value was found where finite input is required."""


class DegenerateWeightsError(WmmdError):
    """All effective sample weights vanish; the estimator is undefined."""


class LabelError(WmmdError, IndexError):
    """A class label is outside [0, class_count)."""


class ParseError(WmmdError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(WmmdError):
    """File contents disagree with the expected layout."""
