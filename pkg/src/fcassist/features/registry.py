"""Feature registry: base features evaluated on the orig, diff and log variants.

Degenerate conditions (the only sources of NaN or fixed values):

=============================  ===========================================
condition                      result
=============================  ===========================================
constant variant               ``is_constant`` = 1; every feature 0 except
                               flat_spots_fraction = 1,
                               longest_flat_run = n, boxcox_lambda = 1,
                               nperiods as usual, last_anomaly_* NaN and
                               the seasonal entries below
fewer than 2 full periods      seasonal_strength, peak, trough NaN
(or period 1)
lag beyond n - 2               acf_seas, pacf_seas, ac_9 NaN
no anomaly detected            last_anomaly_pos_rel / _neg_rel NaN
variant shorter than a         every feature of that group NaN
group's minimum length         (anomaly 8, stationarity/shape 10,
                               complexity 16)
numerically undefined result   NaN (singular regression, zero-length
                               histogram support, zero matches in SampEn)
=============================  ===========================================
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..series import SeriesError, TimeSeries, first_difference, log_transform
from .catch22 import CATCH22_NAMES, catch22_features
from .complexity import complexity_stats
from .shape import anomaly_stats, drawdown_stats, normality_stats, shape_stats
from .stationarity import stationarity_stats
from .stl import STL_NAMES, boxcox_lambda, stl_features
from .tsfeats import acf_features, hctsa_features, portmanteau_features

REGISTRY_VERSION = "1"
VARIANTS = ("orig", "diff", "log")
MIN_LENGTH = 8

# (group, minimum length, feature names, function(x, period) -> dict)
GROUPS: list[tuple[str, int, tuple[str, ...], Callable]] = [
    ("acf", 4, ("acf1", "acf10_ss", "acf_seas", "pacf10_ss", "pacf_seas", "ac_9"), acf_features),
    ("stl", 4, STL_NAMES + ("boxcox_lambda",),
     lambda x, p: {**stl_features(x, p), "boxcox_lambda": boxcox_lambda(x)}),
    ("stationarity", 10, ("adf_stat", "kpss_level", "kpss_trend", "pp_stat"),
     lambda x, p: stationarity_stats(x)),
    ("normality", 4, ("jarque_bera", "anderson_darling", "cramer_von_mises"),
     lambda x, p: normality_stats(x)),
    ("shape", 10, ("skewness", "kurtosis", "crossing_points_fraction", "flat_spots_fraction",
                   "longest_flat_run", "lumpiness", "stability", "nonlinearity", "arch_lm"),
     shape_stats),
    ("portmanteau", 4, ("ljung_box_1", "ljung_box_seas"), portmanteau_features),
    ("complexity", 16, ("hurst_rs", "dfa_exponent", "higuchi_fd", "madogram_fd", "variogram_fd",
                        "approx_entropy", "sample_entropy", "spectral_entropy"),
     lambda x, p: complexity_stats(x)),
    ("anomaly", 8, ("tukey_mad_fraction", "iqr_fraction", "iqr_fraction_pos", "iqr_fraction_neg",
                    "last_anomaly_pos_rel", "last_anomaly_neg_rel"),
     anomaly_stats),
    ("drawdown", 2, ("drawdown_mean_depth", "drawdown_mean_length"), lambda x, p: drawdown_stats(x)),
    ("hctsa", 6, ("first_acf_zero_crossing", "embed2_incircle_1", "embed2_incircle_2",
                  "motiftwo_entro3", "walker_propcross", "std1st_der"),
     lambda x, p: hctsa_features(x)),
    ("catch22", 7, CATCH22_NAMES, lambda x, p: catch22_features(x)),
]


BASE_FEATURES: tuple[str, ...] = tuple(
    name for _, _, names, _ in GROUPS for name in names
) + ("is_constant",)

FEATURE_NAMES: tuple[str, ...] = tuple(f"{v}.{b}" for v in VARIANTS for b in BASE_FEATURES)

NOT_IMPLEMENTED = (
    "Hurst: Whittle, Haslett-Raftery, lifting scheme, fractal spectral/block/ACVF variants",
    "normality: Shapiro-Wilk, Lilliefors, Shapiro-Francia, Pearson (Jarque-Bera, "
    "Anderson-Darling and Cramer-von Mises are computed instead)",
    "hctsa: boot_stationarity_fixed, boot_stationarity_ac2",
    "heterogeneity: arch_acf, garch_acf, garch_r2",
    "misc: smoothing index, Kelly ratio",
    "entropy: fast sample/approximate variants and smoothed spectral variants "
    "(single Welch spectral entropy computed)",
)

_SEASONAL_ONLY = ("seasonal_strength", "peak", "trough")


def _constant_features(n: int, period: int) -> dict[str, float]:
    out = dict.fromkeys(BASE_FEATURES, 0.0)
    out["is_constant"] = 1.0
    out["flat_spots_fraction"] = 1.0
    out["longest_flat_run"] = float(n)
    out["boxcox_lambda"] = 1.0
    out["nperiods"] = float(n // period) if period > 1 else 0.0
    out["last_anomaly_pos_rel"] = np.nan
    out["last_anomaly_neg_rel"] = np.nan
    if not (period > 1 and n >= 2 * period):
        for k in _SEASONAL_ONLY:
            out[k] = np.nan
    if not (1 < period <= n - 2):
        out["acf_seas"] = out["pacf_seas"] = np.nan
    if n - 2 < 9:
        out["ac_9"] = np.nan
    return out


def base_features(x, period: int) -> dict[str, float]:
    """Evaluate every registered base feature on a single array."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if np.ptp(x) == 0:
        return _constant_features(n, period)
    out: dict[str, float] = {}
    for group, min_len, names, fn in GROUPS:
        vals = dict.fromkeys(names, np.nan)
        if n >= min_len:
            try:
                with np.errstate(all="ignore"):
                    vals.update(fn(x, period))
            except (ValueError, np.linalg.LinAlgError, ZeroDivisionError, FloatingPointError):
                pass
        for k in names:
            v = float(vals[k])
            out[k] = v if math.isfinite(v) else np.nan
    out["is_constant"] = 0.0
    return out


def series_variants(train: TimeSeries) -> dict[str, np.ndarray]:
    return {
        "orig": train.values,
        "diff": first_difference(train).values,
        "log": log_transform(train).values,
    }


def compute_features(train: TimeSeries) -> dict[str, float]:
    """Ordered feature vector ``<variant>.<feature>`` for a training series."""
    if len(train) < MIN_LENGTH:
        raise SeriesError(
            f"series {train.id!r} has {len(train)} values; features need at least {MIN_LENGTH}"
        )
    out: dict[str, float] = {}
    for variant, x in series_variants(train).items():
        for k, v in base_features(x, train.period).items():
            out[f"{variant}.{k}"] = v
    return out


def meta_features(horizon: int, frequency: str) -> dict[str, float]:
    return {
        "horizon": float(horizon),
        "is_daily": float(frequency == "daily"),
        "is_weekly": float(frequency == "weekly"),
        "is_monthly": float(frequency == "monthly"),
    }


META_NAMES = ("horizon", "is_daily", "is_weekly", "is_monthly")
