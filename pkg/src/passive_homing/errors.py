"""Exceptions raised by the homing toolkit

Every error derives from ``HomingError`` which itself is a ``ValueError``,
so callers that only care about "bad input" can keep catching ``ValueError``.
"""


class HomingError(ValueError):
    """Base class for all toolkit errors"""


class InvalidAttitudeError(HomingError):
    """Quaternion is not unit-norm within tolerance"""


class DegenerateGeometryError(HomingError):
    """Line of sight is undefined (zero range)"""


class NoCollisionSolutionError(HomingError):
    """No missile heading puts the missile on a collision triangle"""


class TargetOpeningError(HomingError):
    """Closing velocity is not positive, time-to-go is undefined"""


class ConfigurationError(HomingError):
    """Invalid configuration, shape mismatch or missing resource"""


class NumericInputError(HomingError):
    """Non-finite value fed to a network"""


class UsageError(HomingError):
    """API used out of order (e.g. backward without a recorded forward pass)"""


class UpdateAbortedError(HomingError):
    """Policy update produced a non-finite loss and was rolled back

    Attributes:
        batch_index: Training batch at which the abort happened (if known)
    """

    def __init__(self, message: str, batch_index: int | None = None):
        super().__init__(message)
        self.batch_index = batch_index


class CheckpointError(HomingError):
    """Checkpoint file is missing, malformed or of an unknown version"""


class ReportFormatError(HomingError):
    """Campaign report file cannot be parsed"""
