"""Exponential smoothing members, AICc selection, Theta and Comb."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import optimize

from .seasonal import seasonal_wrapper

ALPHA_BOUNDS = (1e-4, 0.9999)
PHI_BOUNDS = (0.8, 0.98)


@njit(cache=True)
def _holt_sse(y, alpha, beta, phi, l0, b0, trend):
    level, slope = l0, b0
    sse = 0.0
    for t in range(1, y.size):
        f = level + phi * slope if trend else level
        e = y[t] - f
        sse += e * e
        if trend:
            new_level = f + alpha * e
            slope = phi * slope + beta * e
            level = new_level
        else:
            level = level + alpha * e
    return sse


@njit(cache=True)
def _holt_final(y, alpha, beta, phi, l0, b0, trend):
    level, slope = l0, b0
    for t in range(1, y.size):
        f = level + phi * slope if trend else level
        e = y[t] - f
        if trend:
            new_level = f + alpha * e
            slope = phi * slope + beta * e
            level = new_level
        else:
            level = level + alpha * e
    return level, slope


@njit(cache=True)
def _hw_run(y, m, alpha, beta, gamma, l0, b0, s0):
    level, slope = l0, b0
    season = s0.copy()
    sse = 0.0
    for t in range(m, y.size):
        j = t % m
        f = level + slope + season[j]
        e = y[t] - f
        sse += e * e
        new_level = level + slope + alpha * e
        slope = slope + beta * e
        season[j] = season[j] + gamma * e
        level = new_level
    return sse, level, slope, season


@dataclass
class SmoothingFit:
    name: str
    params: dict
    sse: float
    n_errors: int
    n_params: int
    level: float
    slope: float = 0.0
    phi: float = 1.0
    season: np.ndarray | None = None
    n_train: int = 0

    @property
    def aicc(self) -> float:
        n, k = self.n_errors, self.n_params
        if n - k - 1 <= 0:
            return np.inf
        return aicc_from_sse(self.sse, n, k)

    def forecast(self, h: int) -> np.ndarray:
        steps = np.arange(1, h + 1)
        if self.season is not None:
            m = self.season.size
            phases = (self.n_train + steps - 1) % m
            return self.level + steps * self.slope + self.season[phases]
        if self.phi == 1.0:
            return self.level + steps * self.slope
        damp = np.cumsum(self.phi**steps)
        return self.level + damp * self.slope


def aicc_from_sse(sse: float, n: int, k: int) -> float:
    return n * np.log(sse / n) + 2 * k + 2 * k * (k + 1) / (n - k - 1)


def _sse_floor(y: np.ndarray) -> float:
    return 1e-20 * y.size * max(1.0, float(np.mean(y * y)))


def _nelder_mead(fun, x0, bounds):
    res = optimize.minimize(
        fun, x0, method="Nelder-Mead", bounds=bounds,
        options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 400},
    )
    return res.x


def fit_ses(y) -> SmoothingFit:
    y = np.ascontiguousarray(y, dtype=float)
    l0 = y[0]
    (alpha,) = _nelder_mead(lambda p: _holt_sse(y, p[0], 0.0, 1.0, l0, 0.0, False), [0.5], [ALPHA_BOUNDS])
    sse = max(_holt_sse(y, alpha, 0.0, 1.0, l0, 0.0, False), _sse_floor(y))
    level, _ = _holt_final(y, alpha, 0.0, 1.0, l0, 0.0, False)
    return SmoothingFit("SES", {"alpha": alpha}, sse, y.size - 1, 2, level, n_train=y.size)


def fit_holt(y, damped: bool = False) -> SmoothingFit:
    y = np.ascontiguousarray(y, dtype=float)
    if y.size < 3:
        raise ValueError("Holt needs at least 3 values")
    l0, b0 = y[0], y[1] - y[0]

    def unpack(p):
        alpha, bstar = p[0], p[1]
        phi = p[2] if damped else 1.0
        return alpha, alpha * bstar, phi

    def sse(p):
        a, b, phi = unpack(p)
        return _holt_sse(y, a, b, phi, l0, b0, True)

    x0 = [0.5, 0.1] + ([0.9] if damped else [])
    bounds = [ALPHA_BOUNDS, ALPHA_BOUNDS] + ([PHI_BOUNDS] if damped else [])
    p = _nelder_mead(sse, x0, bounds)
    a, b, phi = unpack(p)
    level, slope = _holt_final(y, a, b, phi, l0, b0, True)
    name = "DampedHolt" if damped else "Holt"
    params = {"alpha": a, "beta": b} | ({"phi": phi} if damped else {})
    return SmoothingFit(
        name, params, max(sse(p), _sse_floor(y)), y.size - 1, len(x0) + 2,
        level, slope, phi, n_train=y.size,
    )


def fit_holt_winters(y, period: int) -> SmoothingFit:
    """Additive Holt-Winters; needs two full periods."""
    y = np.ascontiguousarray(y, dtype=float)
    m = period
    if m < 2 or y.size < 2 * m:
        raise ValueError("Holt-Winters needs at least two full periods")
    l0 = y[:m].mean()
    b0 = (y[m : 2 * m].mean() - l0) / m
    s0 = y[:m] - l0

    def unpack(p):
        alpha, bstar, gstar = p
        return alpha, alpha * bstar, (1.0 - alpha) * gstar

    def sse(p):
        a, b, g = unpack(p)
        return _hw_run(y, m, a, b, g, l0, b0, s0)[0]

    p = _nelder_mead(sse, [0.3, 0.1, 0.1], [ALPHA_BOUNDS, ALPHA_BOUNDS, ALPHA_BOUNDS])
    a, b, g = unpack(p)
    total, level, slope, season = _hw_run(y, m, a, b, g, l0, b0, s0)
    return SmoothingFit(
        "HoltWintersAdd", {"alpha": a, "beta": b, "gamma": g},
        max(total, _sse_floor(y)), y.size - m, 3 + 2 + m, level, slope,
        season=season, n_train=y.size,
    )


def ets_family(y, period: int, seasonal: bool = True) -> SmoothingFit:
    """Best of SES, Holt, DampedHolt (and additive Holt-Winters) by AICc."""
    y = np.ascontiguousarray(y, dtype=float)
    fits = [fit_ses(y)]
    if y.size >= 4:
        fits.append(fit_holt(y))
        fits.append(fit_holt(y, damped=True))
    if seasonal and period > 1 and y.size >= 2 * period + 4:
        fits.append(fit_holt_winters(y, period))
    scores = [f.aicc for f in fits]
    return fits[int(np.argmin(scores))]


def ols_slope(y: np.ndarray) -> float:
    t = np.arange(y.size, dtype=float)
    tc = t - t.mean()
    return float(tc @ (y - y.mean()) / (tc @ tc))


def theta_core(y: np.ndarray, h: int) -> np.ndarray:
    ses = fit_ses(y)
    return ses.forecast(h) + 0.5 * ols_slope(y) * np.arange(1, h + 1)


def theta_forecast(y, h: int, period: int = 1, adjust: bool = True) -> np.ndarray:
    """SES on the seasonally adjusted series plus half the OLS slope as drift."""
    y = np.asarray(y, dtype=float)
    if y.size < 4:
        raise ValueError("Theta needs at least 4 values")
    if not adjust:
        return theta_core(y, h)
    sa = seasonal_wrapper(y, period)
    return sa.reseasonalize(theta_core(sa.adjusted, h))


def comb_components(y, h: int, period: int = 1) -> np.ndarray:
    """SES, Holt and DampedHolt forecasts (rows) on adjusted data, reseasonalized."""
    y = np.asarray(y, dtype=float)
    if y.size < 4:
        raise ValueError("Comb needs at least 4 values")
    sa = seasonal_wrapper(y, period)
    x = sa.adjusted
    rows = [fit_ses(x).forecast(h), fit_holt(x).forecast(h), fit_holt(x, damped=True).forecast(h)]
    return np.array([sa.reseasonalize(r) for r in rows])


def comb_forecast(y, h: int, period: int = 1) -> np.ndarray:
    return comb_components(y, h, period).mean(axis=0)
