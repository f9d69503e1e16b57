"""Visibility-graph link validation against a GJR-GARCH null ensemble."""

from .ensemble import EnsembleConfig, LinkFrequency, generate_frequencies, stability_diagnostic
from .garch import FitReport, GarchError, GjrGarchParams, filter_volatility, fit, simulate
from .stats import NoiseFamily, distribution_distance, rank_sum_test, stream
from .timeseries import DataError, PriceSeries, ReturnSeries, VolatilitySeries, compute_returns, load_csv
from .validation import ValidationConfig, sliding_indicator, validate_links, validated_visibility
from .visibility import VisibilityGraph, build_pair, degrees, ivg_build, vg_build

__version__ = "0.1.0"

__all__ = [
    "DataError", "EnsembleConfig", "FitReport", "GarchError", "GjrGarchParams", "LinkFrequency",
    "NoiseFamily", "PriceSeries", "ReturnSeries", "ValidationConfig", "VisibilityGraph",
    "VolatilitySeries", "build_pair", "compute_returns", "degrees", "distribution_distance",
    "filter_volatility", "fit", "generate_frequencies", "ivg_build", "load_csv", "rank_sum_test",
    "simulate", "sliding_indicator", "stability_diagnostic", "stream", "validate_links",
    "validated_visibility", "vg_build",
]
