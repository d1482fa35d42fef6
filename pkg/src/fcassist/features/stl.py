"""Decomposition-based features: strengths, spikiness, trend shape."""

from __future__ import annotations

import numpy as np
from scipy import optimize

from ..decompose import Decomposition, additive, nonseasonal
from .autocorr import acf

STL_NAMES = (
    "nperiods",
    "trend_strength",
    "seasonal_strength",
    "spike",
    "linearity",
    "curvature",
    "e_acf1",
    "e_acf10",
    "peak",
    "trough",
)


def decompose_for_features(x: np.ndarray, period: int, backend: str = "classical") -> Decomposition:
    if period >= 2 and x.size >= 2 * period:
        return additive(x, period, backend)
    return nonseasonal(x)


def _strength(num_var: float, den_var: float) -> float:
    if den_var <= 1e-12 * max(1.0, num_var):
        return 0.0
    return float(max(0.0, 1.0 - num_var / den_var))


def _orthopoly_coefs(trend: np.ndarray) -> tuple[float, float]:
    # coefficients on orthonormal degree-1 and degree-2 polynomials in time
    n = trend.size
    t = np.arange(n, dtype=float)
    V = np.column_stack([np.ones(n), t, t * t])
    q, _ = np.linalg.qr(V)
    q[:, 1] *= np.sign(q[-1, 1] - q[0, 1]) or 1.0
    q[:, 2] *= np.sign(q[0, 2]) or 1.0
    return float(q[:, 1] @ trend), float(q[:, 2] @ trend)


def stl_features(x, period: int, backend: str = "classical") -> dict[str, float]:
    """Trend/seasonal strengths and remainder shape from an additive decomposition.

    Seasonal outputs are NaN when fewer than two full periods are available
    (or the series is non-seasonal).
    """
    x = np.asarray(x, dtype=float)
    dec = decompose_for_features(x, period, backend)
    seasonal_ok = dec.period > 1
    keep = dec.interior
    trend = dec.trend[keep]
    season = dec.seasonal[keep]
    rem = dec.remainder[keep]
    out = dict.fromkeys(STL_NAMES, np.nan)
    out["nperiods"] = float(x.size // period) if period > 1 else 0.0
    vr = np.var(rem, ddof=1) if rem.size > 1 else 0.0
    out["trend_strength"] = _strength(vr, np.var(trend + rem, ddof=1))
    if seasonal_ok:
        out["seasonal_strength"] = _strength(vr, np.var(season + rem, ddof=1))
        out["peak"] = float(np.argmax(dec.indices) + 1)
        out["trough"] = float(np.argmin(dec.indices) + 1)
    n = rem.size
    if n > 3:
        total = rem.sum()
        sq = rem**2
        loo_mean = (total - rem) / (n - 1)
        loo_var = ((sq.sum() - sq) - (n - 1) * loo_mean**2) / (n - 2)
        out["spike"] = float(np.var(loo_var, ddof=1))
    if trend.size >= 3:
        out["linearity"], out["curvature"] = _orthopoly_coefs(trend)
    if rem.size >= 12:
        r = acf(rem, 10)
        out["e_acf1"] = float(r[1])
        out["e_acf10"] = float(np.sum(r[1:] ** 2))
    elif rem.size >= 3:
        r = acf(rem, 1)
        out["e_acf1"] = float(r[1])
    return out


def boxcox_lambda(x) -> float:
    """Maximum-likelihood Box-Cox lambda on [-1, 2], data shifted positive when needed."""
    x = np.asarray(x, dtype=float)
    if x.min() <= 0:
        x = x - x.min() + 1.0
    if np.ptp(x) == 0:
        return 1.0
    logx = np.log(x)
    slog = logx.sum()
    n = x.size

    def nll(lam: float) -> float:
        y = logx if abs(lam) < 1e-12 else np.expm1(lam * logx) / lam
        v = y.var()
        if not v > 0 or not np.isfinite(v):
            return np.inf
        return 0.5 * n * np.log(v) - (lam - 1.0) * slog

    res = optimize.minimize_scalar(nll, bounds=(-1.0, 2.0), method="bounded")
    return float(res.x)
