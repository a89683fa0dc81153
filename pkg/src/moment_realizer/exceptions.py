"""Custom exceptions for moment-realizer."""

from typing import Optional


class MomentRealizerError(Exception):
    """Base exception for moment-realizer."""
    pass


class ConfigError(MomentRealizerError):
    """Error in configuration."""
    pass


class DimensionError(MomentRealizerError):
    """Tensor, vector or degree does not fit the site space."""
    pass


class KSpecError(MomentRealizerError):
    """Invalid K-spec for the configuration set."""
    pass


class CapExceededError(MomentRealizerError):
    """An enumeration or LP size cap was exceeded."""

    def __init__(self, message: str, limit: Optional[int] = None):
        super().__init__(message)
        self.limit = limit


class LPError(MomentRealizerError):
    """Error inside the linear-programming core."""
    pass


class UnboundedError(LPError):
    """The objective is unbounded below on the feasible region."""
    pass


class PivotLimitError(LPError):
    """The simplex method hit its pivot ceiling."""
    pass


class SolverContractError(LPError):
    """A solver answer failed its own exact re-check."""
    pass


class InstanceFormatError(MomentRealizerError):
    """Malformed instance or result document."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class GeneratorError(MomentRealizerError):
    """Invalid parameters for a point-process generator."""
    pass


class VerificationError(MomentRealizerError):
    """A verdict failed independent verification."""
    pass


class BatchProcessingError(MomentRealizerError):
    """Error during batch processing."""
    pass
