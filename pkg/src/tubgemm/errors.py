"""Exception hierarchy shared by the simulator, models and CLI."""


class TubGemmError(Exception):
    """Base class for all tubgemm errors."""


class ParameterError(TubGemmError, ValueError):
    """Unsupported configuration parameter (bit-width, unary base, ...)."""


class OperandRangeError(TubGemmError, ValueError):
    """An operand does not fit the declared bit-width / polarity."""


class ShapeError(TubGemmError, ValueError):
    """Matrix shapes are inconsistent with each other or the config."""


class StreamFormatError(TubGemmError, ValueError):
    """A unary cycle stream violates the encoder's output contract."""


class AccumulatorOverflowError(TubGemmError, OverflowError):
    """A PE accumulator left its declared signed width."""


class TraceFormatError(TubGemmError, ValueError):
    """A matrix, trace or histogram file could not be parsed."""


class EmptyHistogramError(TubGemmError, ValueError):
    """A statistic was requested from a histogram with no operations."""


class ProfileMissError(TubGemmError, KeyError):
    """No power/area entry exists for the requested design point."""

    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""
