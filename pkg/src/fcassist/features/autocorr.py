"""Sample autocorrelation and partial autocorrelation."""

from __future__ import annotations

import numpy as np


def acf(values, max_lag: int, return_flag: bool = False):
    """Sample ACF for lags ``0..max_lag`` (denominator: n times lag-0 variance).

    A zero-variance input yields all zeros; with ``return_flag`` the
    degenerate flag is returned alongside.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if n < max_lag + 2:
        raise ValueError(f"acf needs at least {max_lag + 2} values, got {n}")
    d = x - x.mean()
    denom = np.dot(d, d)
    if denom <= 0.0 or not np.isfinite(denom):
        out = np.zeros(max_lag + 1)
        return (out, True) if return_flag else out
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(d, nfft)
    full = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    out = full / denom
    out[0] = 1.0
    return (out, False) if return_flag else out


def acf_direct(values, max_lag: int) -> np.ndarray:
    """O(n*lag) definition, used where exact sums matter (short series)."""
    x = np.asarray(values, dtype=float)
    d = x - x.mean()
    denom = np.dot(d, d)
    out = np.zeros(max_lag + 1)
    if denom <= 0:
        return out
    for k in range(max_lag + 1):
        out[k] = np.dot(d[: d.size - k], d[k:]) / denom
    return out


def pacf_from_acf(r: np.ndarray) -> np.ndarray:
    """Durbin-Levinson recursion; r[0] must be 1."""
    max_lag = r.size - 1
    out = np.zeros(max_lag + 1)
    out[0] = 1.0
    if max_lag == 0:
        return out
    phi = np.zeros(max_lag + 1)
    phi[1] = r[1]
    out[1] = r[1]
    v = 1.0 - r[1] ** 2
    for k in range(2, max_lag + 1):
        if v <= 1e-15:
            break
        num = r[k] - np.dot(phi[1:k], r[k - 1 : 0 : -1])
        a = num / v
        new = phi.copy()
        new[k] = a
        new[1:k] = phi[1:k] - a * phi[k - 1 : 0 : -1]
        phi = new
        out[k] = a
        v *= 1.0 - a * a
    return out


def pacf(values, max_lag: int, return_flag: bool = False):
    r, flag = acf(values, max_lag, return_flag=True)
    out = np.zeros(max_lag + 1) if flag else pacf_from_acf(r)
    return (out, flag) if return_flag else out


def first_zero_crossing(r: np.ndarray) -> int:
    """First lag whose autocorrelation is <= 0 (len(r) if none)."""
    below = np.nonzero(r[1:] <= 0)[0]
    return int(below[0]) + 1 if below.size else r.size


def first_minimum(r: np.ndarray) -> int:
    for i in range(1, r.size - 1):
        if r[i] < r[i - 1] and r[i] < r[i + 1]:
            return i
    return r.size
