"""Autocorrelation-family, portmanteau and hctsa-style features."""

from __future__ import annotations

import numpy as np

from .autocorr import acf, first_zero_crossing, pacf_from_acf
from .shape import zscore


def acf_features(x, period: int) -> dict[str, float]:
    x = np.asarray(x, dtype=float)
    n = x.size
    max_lag = min(max(10, period), n - 2)
    r = acf(x, max_lag)
    p = pacf_from_acf(r)
    k = min(10, max_lag)
    seas = period if 1 < period <= max_lag else None
    return {
        "acf1": float(r[1]),
        "acf10_ss": float(np.sum(r[1 : k + 1] ** 2)),
        "acf_seas": float(r[seas]) if seas else np.nan,
        "pacf10_ss": float(np.sum(p[1 : k + 1] ** 2)),
        "pacf_seas": float(p[seas]) if seas else np.nan,
        "ac_9": float(r[9]) if max_lag >= 9 else np.nan,
    }


def ljung_box(x, lag: int) -> float:
    n = x.size
    r = acf(x, lag)
    k = np.arange(1, lag + 1)
    return float(n * (n + 2) * np.sum(r[1:] ** 2 / (n - k)))


def portmanteau_features(x, period: int) -> dict[str, float]:
    x = np.asarray(x, dtype=float)
    n = x.size
    lag_f = min(max(period, 2), n // 2)
    return {"ljung_box_1": ljung_box(x, 1), "ljung_box_seas": ljung_box(x, lag_f)}


def hctsa_features(x) -> dict[str, float]:
    y = zscore(np.asarray(x, dtype=float))
    n = y.size
    r = acf(y, n - 2)
    tau = first_zero_crossing(r)
    if tau >= n - 1:
        tau = 1
    a, b = y[:-tau], y[tau:]
    rad = a * a + b * b
    binary = (y > 0).astype(int)
    words = binary[:-2] * 4 + binary[1:-1] * 2 + binary[2:]
    pw = np.bincount(words, minlength=8) / words.size
    pw = pw[pw > 0]
    walker = np.empty(n)
    walker[0] = 0.0
    for i in range(1, n):
        walker[i] = walker[i - 1] + 0.1 * (y[i - 1] - walker[i - 1])
    cross = (walker[:-1] - y[:-1]) * (walker[1:] - y[1:]) < 0
    return {
        "first_acf_zero_crossing": float(tau),
        "embed2_incircle_1": float(np.mean(rad < 1)),
        "embed2_incircle_2": float(np.mean(rad < 2)),
        "motiftwo_entro3": float(-np.sum(pw * np.log(pw))),
        "walker_propcross": float(np.mean(cross)),
        "std1st_der": float(np.std(np.diff(y), ddof=1)),
    }
