"""Pool catalog and the uniform fit-and-forecast entry point."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..decompose import additive, extend_seasonal
from ..series import TimeSeries
from . import arima, simple, smoothing


class CatalogError(KeyError):
    """Unknown model identifier."""


@dataclass(frozen=True)
class ForecasterSpec:
    model_id: str
    seasonal: bool
    complex: bool
    decomposition: bool
    min_length: str  # human-readable precondition
    nominal_cost: int  # ordinal cost used for deterministic runtime tie-breaks


@dataclass
class ForecastOutput:
    model_id: str
    point_forecast: np.ndarray
    runtime_ms: float
    status: str  # "ok" or "fallback"


def stl_hybrid(y, h: int, period: int, inner: str, backend: str = "classical") -> np.ndarray:
    """Forecast the additively adjusted series with ``inner`` and add the seasonal cycle back.

    With fewer than two periods the inner model runs on the raw series.
    """
    y = np.asarray(y, dtype=float)
    fn = _INNER[inner]
    if period < 2 or y.size < 2 * period:
        return fn(y, h)
    dec = additive(y, period, backend)
    adjusted = y - dec.seasonal
    return fn(adjusted, h) + extend_seasonal(dec.indices, y.size, h)


_INNER: dict[str, Callable[[np.ndarray, int], np.ndarray]] = {
    "ARIMA": lambda y, h: arima.auto_forecast(y, h),
    "ETS": lambda y, h: smoothing.ets_family(y, 1, seasonal=False).forecast(h),
    "Theta": lambda y, h: smoothing.theta_forecast(y, h, adjust=False),
}


def _check(n: int, need: int, model: str) -> None:
    if n < need:
        raise ValueError(f"{model} needs at least {need} values, got {n}")


def _seasonal_trend(degree: int):
    def run(y, h, m):
        return simple.trend_regression(y, h, degree=degree, period=m)

    return run


def _holt_winters(y, h, m):
    return smoothing.fit_holt_winters(y, m).forecast(h)


def _ets(y, h, m):
    _check(y.size, 8, "ETS")
    return smoothing.ets_family(y, m).forecast(h)


_RUNNERS: dict[str, Callable[[np.ndarray, int, int], np.ndarray]] = {
    "SNaive": lambda y, h, m: simple.snaive(y, h, m),
    "Naive": lambda y, h, m: simple.naive(y, h),
    "Drift": lambda y, h, m: simple.drift(y, h),
    "LinTrend": lambda y, h, m: simple.trend_regression(y, h, degree=1),
    "LinTrendSeason": _seasonal_trend(1),
    "QuadTrend": lambda y, h, m: simple.trend_regression(y, h, degree=2),
    "QuadTrendSeason": _seasonal_trend(2),
    "TSB": lambda y, h, m: simple.tsb(y, h),
    "ETS": _ets,
    "HoltWintersAdd": _holt_winters,
    "Theta": lambda y, h, m: smoothing.theta_forecast(y, h, m),
    "ARIMA": lambda y, h, m: arima.auto_forecast(y, h, m, seasonal=False),
    "SARIMA": lambda y, h, m: arima.auto_forecast(y, h, m, seasonal=True),
    "STL-ARIMA": lambda y, h, m: stl_hybrid(y, h, m, "ARIMA"),
    "STL-ETS": lambda y, h, m: stl_hybrid(y, h, m, "ETS"),
    "STL-Theta": lambda y, h, m: stl_hybrid(y, h, m, "Theta"),
}

# model_id, seasonal, complex, decomposition, minimum length, nominal cost
_CATALOG = (
    ("SNaive", True, False, False, "1 period", 2),
    ("Naive", False, False, False, "1", 1),
    ("Drift", False, False, False, "2", 3),
    ("LinTrend", False, False, False, "3", 4),
    ("LinTrendSeason", True, False, False, "2 periods", 6),
    ("QuadTrend", False, False, False, "4", 5),
    ("QuadTrendSeason", True, False, False, "2 periods", 7),
    ("TSB", False, True, False, "4", 8),
    ("ETS", True, True, False, "8 (2 periods + 4 for the seasonal member)", 10),
    ("HoltWintersAdd", True, True, False, "2 periods", 11),
    ("Theta", True, True, False, "4", 9),
    ("ARIMA", False, True, False, "10", 14),
    ("SARIMA", True, True, False, "10", 16),
    ("STL-ARIMA", True, True, True, "10", 15),
    ("STL-ETS", True, True, True, "8", 13),
    ("STL-Theta", True, True, True, "4", 12),
)

POOL: tuple[ForecasterSpec, ...] = tuple(ForecasterSpec(*row) for row in _CATALOG)
MODEL_IDS: tuple[str, ...] = tuple(s.model_id for s in POOL)
_BY_ID = {s.model_id: s for s in POOL}


def pool_catalog() -> list[ForecasterSpec]:
    return list(POOL)


def spec(model_id: str) -> ForecasterSpec:
    try:
        return _BY_ID[model_id]
    except KeyError:
        raise CatalogError(model_id) from None


def fit_and_forecast(model_id: str, train: TimeSeries, h: int) -> ForecastOutput:
    """Fit ``model_id`` on ``train`` and forecast ``h`` steps.

    Any failure inside the model (precondition, convergence, non-finite output)
    yields the Naive forecast with ``status="fallback"``.
    """
    spec(model_id)
    if h < 1:
        raise ValueError("horizon must be positive")
    y = np.asarray(train.values, dtype=float)
    start = time.perf_counter()
    status = "ok"
    try:
        with np.errstate(all="ignore"):
            fc = np.asarray(_RUNNERS[model_id](y, h, train.period), dtype=float)
        if fc.shape != (h,) or not np.all(np.isfinite(fc)):
            raise ValueError("invalid forecast")
    except Exception:  # noqa: BLE001 - the pool boundary must never raise
        fc = simple.naive(y, h)
        status = "fallback"
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return ForecastOutput(model_id, fc, runtime_ms, status)


def forecast_pool(train: TimeSeries, h: int, models=None) -> list[ForecastOutput]:
    return [fit_and_forecast(m, train, h) for m in (models or MODEL_IDS)]
