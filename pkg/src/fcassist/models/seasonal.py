"""Seasonality test and classical seasonal adjustment used by Theta and Comb."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..decompose import classical, extend_seasonal
from ..features.autocorr import acf_direct


def seasonality_test(y: np.ndarray, period: int) -> bool:
    """90% one-sided test on the autocorrelation at the seasonal lag."""
    n = y.size
    if period < 2 or n < 3 * period:
        return False
    r = acf_direct(y, period)
    limit = 1.645 * np.sqrt((1.0 + 2.0 * np.sum(r[1:period] ** 2)) / n)
    return bool(abs(r[period]) > limit)


@dataclass
class SeasonalAdjustment:
    adjusted: np.ndarray
    indices: np.ndarray
    active: bool
    multiplicative: bool
    n_train: int

    def reseasonalize(self, forecast: np.ndarray) -> np.ndarray:
        forecast = np.asarray(forecast, dtype=float)
        if not self.active:
            return forecast.copy()
        s = extend_seasonal(self.indices, self.n_train, forecast.size)
        return forecast * s if self.multiplicative else forecast + s

    def restore_train(self) -> np.ndarray:
        if not self.active:
            return self.adjusted.copy()
        s = np.resize(self.indices, self.n_train)
        return self.adjusted * s if self.multiplicative else self.adjusted + s


def seasonal_wrapper(y, period: int, force: bool | None = None) -> SeasonalAdjustment:
    """Multiplicative classical adjustment when the seasonality test fires.

    Non-positive data switch to additive indices; ``multiplicative`` records
    which mode was used. ``force`` overrides the test.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    active = seasonality_test(y, period) if force is None else bool(force)
    if active and (period < 2 or n < 2 * period):
        active = False
    if not active:
        return SeasonalAdjustment(y.copy(), np.ones(max(period, 1)), False, True, n)
    multiplicative = bool(np.all(y > 0))
    dec = classical(y, period, multiplicative=multiplicative)
    s = dec.seasonal
    adjusted = y / s if multiplicative else y - s
    return SeasonalAdjustment(adjusted, dec.indices, True, multiplicative, n)
