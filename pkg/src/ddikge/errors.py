"""Exception taxonomy.

The CLI maps these to exit codes: config/usage problems exit 2, data
problems exit 3, numerical/training problems exit 4.
"""


class DdikgeError(Exception):
    """Base class for all package errors."""


class ShapeError(DdikgeError, ValueError):
    """An array argument has the wrong shape or dtype."""


class DomainError(DdikgeError, ValueError):
    """A scalar argument is outside its valid domain."""


class ConfigError(DdikgeError, ValueError):
    """A config file or preset is malformed or inconsistent."""


class DataError(DdikgeError):
    """Base class for dataset and artifact I/O problems."""


class ParseError(DataError):
    """A data file could not be parsed; message carries the line number."""


class EmptyDatasetError(DataError):
    """An operation received a dataset with too few triplets."""


class CheckpointError(DataError):
    """A checkpoint file is truncated, corrupt, or mismatched."""


class TrainingError(DdikgeError, RuntimeError):
    """Training produced a non-finite loss or gradient."""


class EvaluationError(DdikgeError):
    """Evaluation inputs are inconsistent (vocab mismatch, empty test set)."""


class OracleError(DdikgeError):
    """A verification oracle could not be computed at the probe point."""
