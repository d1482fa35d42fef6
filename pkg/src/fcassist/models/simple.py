"""Benchmarks and regression models: naive family, polynomial trends, TSB."""

from __future__ import annotations

import numpy as np
from numba import njit

TSB_GRID = np.round(np.arange(1, 51) / 100.0, 2)


def naive(y, h: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.full(h, y[-1])


def snaive(y, h: int, period: int) -> np.ndarray:
    """Repeat the last full season; needs at least one period of data."""
    y = np.asarray(y, dtype=float)
    if period < 2:
        return naive(y, h)
    if y.size < period:
        raise ValueError("seasonal naive needs a full period")
    last = y[-period:]
    return last[np.arange(h) % period]


def drift(y, h: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        raise ValueError("drift needs at least 2 values")
    slope = (y[-1] - y[0]) / (y.size - 1)
    return y[-1] + slope * np.arange(1, h + 1)


def _design(t: np.ndarray, degree: int, period: int, n0: int = 0) -> np.ndarray:
    # time is rescaled to [0, 1] over the training window to keep the quadratic well conditioned
    scale = max(n0 - 1, 1)
    cols = [np.ones(t.size)] + [(t / scale) ** k for k in range(1, degree + 1)]
    if period > 1:
        phase = t.astype(int) % period
        for j in range(1, period):
            cols.append((phase == j).astype(float))
    return np.column_stack(cols)


def trend_regression(y, h: int, degree: int = 1, period: int = 1) -> np.ndarray:
    """OLS on a polynomial time trend, optionally with seasonal dummies.

    Seasonal dummies need two full periods; phase 0 is the first observation.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if period > 1 and n < 2 * period:
        raise ValueError("seasonal trend regression needs two full periods")
    if n < degree + 2:
        raise ValueError("too few values for the trend degree")
    t = np.arange(n, dtype=float)
    X = _design(t, degree, period, n)
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise np.linalg.LinAlgError("singular trend regression")
    return _design(np.arange(n, n + h, dtype=float), degree, period, n) @ beta


@njit(cache=True)
def _tsb_mse(y, alphas, betas, p0, z0):
    na, nb = alphas.size, betas.size
    out = np.empty((na, nb))
    for i in range(na):
        a = alphas[i]
        for j in range(nb):
            b = betas[j]
            p, z = p0, z0
            s = 0.0
            for t in range(y.size):
                e = y[t] - p * z
                s += e * e
                if y[t] != 0.0:
                    p = p + b * (1.0 - p)
                    z = z + a * (y[t] - z)
                else:
                    p = p - b * p
            out[i, j] = s / y.size
    return out


@njit(cache=True)
def _tsb_final(y, a, b, p0, z0):
    p, z = p0, z0
    for t in range(y.size):
        if y[t] != 0.0:
            p = p + b * (1.0 - p)
            z = z + a * (y[t] - z)
        else:
            p = p - b * p
    return p, z


def tsb(y, h: int) -> np.ndarray:
    """Occurrence probability times demand size, both exponentially smoothed.

    The smoothing pair minimizes in-sample one-step MSE over a 0.01..0.5 grid;
    ties go to the smallest (alpha, beta).
    """
    y = np.ascontiguousarray(y, dtype=float)
    if y.size < 4:
        raise ValueError("TSB needs at least 4 values")
    nz = y != 0
    if not nz.any():
        return np.zeros(h)
    p0 = float(nz.mean())
    z0 = float(y[nz].mean())
    mse = _tsb_mse(y, TSB_GRID, TSB_GRID, p0, z0)
    i, j = np.unravel_index(int(np.argmin(mse)), mse.shape)
    p, z = _tsb_final(y, TSB_GRID[i], TSB_GRID[j], p0, z0)
    return np.full(h, p * z)
