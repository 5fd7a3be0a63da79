"""Exception hierarchy shared by every module.

All errors derive from :class:`LightFieldError` so callers (the CLI in
particular) can separate bad data from programming mistakes.
"""


class LightFieldError(Exception):
    """Base class for data errors raised by lfmacro."""


class InvalidDimensionError(LightFieldError, ValueError):
    pass


class ValidationError(LightFieldError, ValueError):
    """A light field failed :func:`lfmacro.core.validate`."""

    def __init__(self, violation):
        super().__init__(str(violation))
        self.violation = violation


class OutOfRangeError(LightFieldError, IndexError):
    pass


class TradeoffError(LightFieldError, ValueError):
    """Macro-pixel size incompatible with the angular grid."""


class EmptyOutputError(LightFieldError, ValueError):
    pass


class GeometryError(LightFieldError, ValueError):
    def __init__(self, message, layer_index=None):
        super().__init__(message)
        self.layer_index = layer_index


class UnsupportedBaselineError(LightFieldError, ValueError):
    pass


class ParameterError(LightFieldError, ValueError):
    pass


class InsufficientViewsError(LightFieldError, ValueError):
    pass


class FormatError(LightFieldError, ValueError):
    """On-disk light field, manifest or layer file is malformed."""


class ExportAbortedError(LightFieldError, OSError):
    """Export stopped on an output-side failure; ``report`` holds partial results."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
