"""moment-realizer - exact truncated K-moment problems for finite point processes."""

from .config_space import Configuration, KSpec, KVariant, SiteSpace, enumerate_configurations
from .moments import FiniteMeasure, MomentTensor, correlation_functions, power_moments
from .polynomial import MomentFunctional, Polynomial, RestrictedCubic
from .realizer import (
    PositivityCertificate,
    RealizabilityInstance,
    Realizer,
    RepresentingMeasure,
    VerificationReport,
)
from .batch_processor import BatchProcessor
from .version import __version__

__all__ = [
    "Configuration",
    "KSpec",
    "KVariant",
    "SiteSpace",
    "enumerate_configurations",
    "FiniteMeasure",
    "MomentTensor",
    "power_moments",
    "correlation_functions",
    "Polynomial",
    "RestrictedCubic",
    "MomentFunctional",
    "RealizabilityInstance",
    "Realizer",
    "RepresentingMeasure",
    "PositivityCertificate",
    "VerificationReport",
    "BatchProcessor",
    "__version__"
]
