"""Time-series feature bank."""

from .autocorr import acf, pacf
from .complexity import complexity_stats
from .registry import (
    BASE_FEATURES,
    FEATURE_NAMES,
    META_NAMES,
    compute_features,
    meta_features,
)
from .shape import anomaly_stats, shape_stats
from .stationarity import stationarity_stats
from .stl import stl_features

__all__ = [
    "BASE_FEATURES",
    "FEATURE_NAMES",
    "META_NAMES",
    "acf",
    "anomaly_stats",
    "complexity_stats",
    "compute_features",
    "meta_features",
    "pacf",
    "shape_stats",
    "stationarity_stats",
    "stl_features",
]
