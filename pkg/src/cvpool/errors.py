"""Exception types shared across the package."""


class CvpoolError(Exception):
    """Base class for all cvpool errors."""


class DataError(CvpoolError):
    """Malformed, inconsistent or unusable input data."""


class TrainingError(CvpoolError):
    """Training cannot proceed (e.g. a single-class training partition)."""
