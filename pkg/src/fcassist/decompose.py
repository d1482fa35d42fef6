"""Classical moving-average decomposition shared by features and models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Decomposition:
    trend: np.ndarray  # NaN where the moving average is undefined
    seasonal: np.ndarray
    remainder: np.ndarray
    indices: np.ndarray  # one seasonal index per phase, phase 0 = first observation
    period: int
    multiplicative: bool = False

    @property
    def interior(self) -> np.ndarray:
        return ~np.isnan(self.trend)


def centered_moving_average(x: np.ndarray, order: int) -> np.ndarray:
    """Centered MA of the given order (2xorder MA when order is even)."""
    x = np.asarray(x, dtype=float)
    n = x.size
    out = np.full(n, np.nan)
    if order <= 1:
        return x.copy()
    if order % 2:
        w = np.ones(order) / order
    else:
        w = np.r_[0.5, np.ones(order - 1), 0.5] / order
    k = w.size
    if n < k:
        return out
    half = k // 2
    out[half : n - half] = np.convolve(x, w, mode="valid")
    return out


def seasonal_indices(detrended: np.ndarray, period: int, multiplicative: bool) -> np.ndarray:
    n = detrended.size
    idx = np.empty(period)
    for j in range(period):
        vals = detrended[j::period]
        vals = vals[~np.isnan(vals)]
        idx[j] = vals.mean() if vals.size else (1.0 if multiplicative else 0.0)
    if multiplicative:
        return idx / idx.mean()
    return idx - idx.mean()


def classical(x, period: int, multiplicative: bool = False) -> Decomposition:
    """Moving-average trend, per-phase mean seasonal, remainder.

    Needs at least two full periods; callers check that.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if period < 2 or n < 2 * period:
        raise ValueError(f"need at least 2 periods of {period}, got {n} values")
    trend = centered_moving_average(x, period)
    detr = x / trend if multiplicative else x - trend
    idx = seasonal_indices(detr, period, multiplicative)
    seasonal = np.resize(idx, n)
    if multiplicative:
        remainder = x / (trend * seasonal)
    else:
        remainder = x - trend - seasonal
    return Decomposition(trend, seasonal, remainder, idx, period, multiplicative)


def nonseasonal(x) -> Decomposition:
    """Trend-only decomposition used when no seasonal cycle is identifiable."""
    x = np.asarray(x, dtype=float)
    n = x.size
    w = max(3, 2 * (n // 10) + 1)
    trend = centered_moving_average(x, w)
    seasonal = np.zeros(n)
    return Decomposition(trend, seasonal, x - trend, np.zeros(1), 1)


def stl(x, period: int) -> Decomposition:
    """Loess-based alternative backed by statsmodels (optional dependency)."""
    from statsmodels.tsa.seasonal import STL

    x = np.asarray(x, dtype=float)
    res = STL(x, period=period, robust=True).fit()
    seasonal = np.asarray(res.seasonal)
    idx = np.array([seasonal[j::period][-1] for j in range(period)])
    return Decomposition(np.asarray(res.trend), seasonal, np.asarray(res.resid), idx, period)


BACKENDS = ("classical", "stl")


def additive(x, period: int, backend: str = "classical") -> Decomposition:
    """Additive decomposition with the chosen backend."""
    if backend == "classical":
        return classical(x, period)
    if backend == "stl":
        return stl(x, period)
    raise ValueError(f"unknown decomposition backend {backend!r}; expected one of {BACKENDS}")


def extend_seasonal(indices: np.ndarray, n_train: int, h: int) -> np.ndarray:
    """Seasonal indices for the h steps following a training window of n_train."""
    period = indices.size
    phases = (n_train + np.arange(h)) % period
    return indices[phases]
