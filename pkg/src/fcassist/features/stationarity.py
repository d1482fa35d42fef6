"""Unit-root and stationarity test statistics (raw statistics, no p-values)."""

from __future__ import annotations

import numpy as np


def short_lag(n: int) -> int:
    return int(np.floor(4.0 * (n / 100.0) ** 0.25))


def _bartlett_lrv(u: np.ndarray, lags: int) -> float:
    n = u.size
    s = np.dot(u, u) / n
    for k in range(1, lags + 1):
        s += 2.0 * (1.0 - k / (lags + 1.0)) * np.dot(u[k:], u[:-k]) / n
    return s


def kpss(x, trend: bool = False, lags: int | None = None) -> float:
    x = np.asarray(x, dtype=float)
    n = x.size
    lags = short_lag(n) if lags is None else lags
    if trend:
        t = np.arange(1, n + 1, dtype=float)
        X = np.column_stack([np.ones(n), t])
        beta, *_ = np.linalg.lstsq(X, x, rcond=None)
        e = x - X @ beta
    else:
        e = x - x.mean()
    s = np.cumsum(e)
    lrv = _bartlett_lrv(e, lags)
    if lrv <= 0:
        return np.nan
    return float(np.dot(s, s) / (n * n * lrv))


def _ols(X: np.ndarray, y: np.ndarray):
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    dof = y.size - X.shape[1]
    sigma2 = np.dot(resid, resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return beta, resid, cov


def adf(x, lags: int | None = None) -> float:
    """Augmented Dickey-Fuller t-statistic with constant and linear trend."""
    x = np.asarray(x, dtype=float)
    n = x.size
    k = short_lag(n) if lags is None else lags
    dx = np.diff(x)
    rows = dx.size - k
    y = dx[k:]
    cols = [np.ones(rows), x[k : k + rows], np.arange(k + 1, k + 1 + rows, dtype=float)]
    for i in range(1, k + 1):
        cols.append(dx[k - i : k - i + rows])
    X = np.column_stack(cols)
    beta, _, cov = _ols(X, y)
    return float(beta[1] / np.sqrt(cov[1, 1]))


def pp_z_alpha(x, lags: int | None = None) -> float:
    """Phillips-Perron Z(alpha) statistic, regression with a constant."""
    x = np.asarray(x, dtype=float)
    n = x.size
    lags = short_lag(n) if lags is None else lags
    y = x[1:]
    X = np.column_stack([np.ones(n - 1), x[:-1]])
    beta, u, cov = _ols(X, y)
    T = y.size
    s2 = np.dot(u, u) / (T - 2)
    gamma0 = np.dot(u, u) / T
    lam2 = _bartlett_lrv(u, lags)
    return float(T * (beta[1] - 1.0) - 0.5 * (T * T * cov[1, 1] / s2) * (lam2 - gamma0))


def stationarity_stats(x) -> dict[str, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 10:
        raise ValueError("stationarity statistics need at least 10 values")
    return {
        "adf_stat": adf(x),
        "kpss_level": kpss(x, trend=False),
        "kpss_trend": kpss(x, trend=True),
        "pp_stat": pp_z_alpha(x),
    }
