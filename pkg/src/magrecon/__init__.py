"""Magnitude of finite metric spaces: exact small-scale and formal series, and reconstruction."""

from .errors import MagnitudeError, ParseError, ReconstructionError
from .formal import extract_series_from_samples, path_expansion
from .metric import FiniteMetricSpace, are_isometric, random_metric_space, validate
from .numeric import magnitude_at, magnitude_grid
from .reconstruction import ReconstructionResult, detect_complete_graph, reconstruct
from .series import GeneralizedSeries, TaylorSeries
from .small_scale import AsymptoticDerivatives, compute_nu_delta, derivative_limits

__all__ = [
    "AsymptoticDerivatives",
    "FiniteMetricSpace",
    "GeneralizedSeries",
    "MagnitudeError",
    "ParseError",
    "ReconstructionError",
    "ReconstructionResult",
    "TaylorSeries",
    "are_isometric",
    "compute_nu_delta",
    "derivative_limits",
    "detect_complete_graph",
    "extract_series_from_samples",
    "magnitude_at",
    "magnitude_grid",
    "path_expansion",
    "random_metric_space",
    "reconstruct",
    "validate",
]
