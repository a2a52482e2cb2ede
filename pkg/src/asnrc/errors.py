class AsnrcError(Exception):
    """Base class for every error raised by asnrc."""


class DimensionError(AsnrcError, ValueError):
    """Matrix or vector shapes do not line up."""


class TopologyError(AsnrcError):
    """A reservoir topology could not be generated or is inconsistent."""


class TrainingError(AsnrcError):
    """Readout training or a run that depends on it cannot proceed."""


class MetricError(AsnrcError, ValueError):
    """A metric is undefined for the given series."""


class ModelFileError(AsnrcError):
    """A model file is malformed, has the wrong version or inconsistent matrices."""


class ModelNotFoundError(ModelFileError, FileNotFoundError):
    """The requested model file does not exist."""


class NumericalError(AsnrcError, ValueError):
    """Non-finite values where finite ones are required."""


class ModelDimensionError(ModelFileError, DimensionError):
    """Matrices stored in a model file do not agree in shape."""


class SignalError(AsnrcError, ValueError):
    """A signal request cannot be produced."""
