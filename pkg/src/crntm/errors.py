class CRNTMError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CRNTMError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(CRNTMError, ValueError):
    pass


class ConfigError(CRNTMError, ValueError):
    pass


class DataError(CRNTMError, ValueError):
    """Malformed or empty input data."""


class CheckpointError(CRNTMError, ValueError):
    pass


class DivergenceError(CRNTMError, FloatingPointError):
    """Training produced a non-finite loss; ``term`` names the culprit."""

    def __init__(self, message, term=None, step=None):
        super().__init__(message)
        self.term = term
        self.step = step
