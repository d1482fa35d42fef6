"""Univariate forecasting pool."""

from .arima import arima_auto, arima_forecast
from .catalog import (
    MODEL_IDS,
    POOL,
    CatalogError,
    ForecasterSpec,
    ForecastOutput,
    fit_and_forecast,
    forecast_pool,
    pool_catalog,
    spec,
    stl_hybrid,
)
from .seasonal import seasonal_wrapper, seasonality_test
from .simple import tsb
from .smoothing import comb_forecast, ets_family, theta_forecast

__all__ = [
    "MODEL_IDS",
    "POOL",
    "CatalogError",
    "ForecasterSpec",
    "ForecastOutput",
    "arima_auto",
    "arima_forecast",
    "comb_forecast",
    "ets_family",
    "fit_and_forecast",
    "forecast_pool",
    "pool_catalog",
    "seasonal_wrapper",
    "seasonality_test",
    "spec",
    "stl_hybrid",
    "theta_forecast",
    "tsb",
]
