"""Distribution shape, tiling, nonlinearity, normality and anomaly features."""

from __future__ import annotations

import numpy as np
from scipy import stats

from .stl import decompose_for_features

MAD_SCALE = 1.4826


def zscore(x: np.ndarray) -> np.ndarray:
    sd = x.std(ddof=1)
    return (x - x.mean()) / sd if sd > 0 else np.zeros_like(x)


def longest_run(flags: np.ndarray, value) -> int:
    best = cur = 0
    for f in flags:
        cur = cur + 1 if f == value else 0
        best = max(best, cur)
    return best


def _tile_width(n: int, period: int) -> int:
    if period > 1 and n >= 2 * period:
        return period
    return max(2, n // 5)


def _tiles(x: np.ndarray, width: int) -> list[np.ndarray]:
    return [x[i : i + width] for i in range(0, x.size - width + 1, width)]


def _ols_r2(X: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    ssr = float(np.sum((y - X @ beta) ** 2))
    sst = float(np.sum((y - y.mean()) ** 2))
    return ssr, (1.0 - ssr / sst if sst > 0 else 0.0)


def nonlinearity(x: np.ndarray) -> float:
    """Scaled Terasvirta neural-network test statistic with one lag."""
    z = zscore(x)
    y, lag = z[1:], z[:-1]
    one = np.ones(y.size)
    X0 = np.column_stack([one, lag])
    u = y - X0 @ np.linalg.lstsq(X0, y, rcond=None)[0]
    ssr0 = float(u @ u)
    ssr1, _ = _ols_r2(np.column_stack([one, lag, lag**2, lag**3]), u)
    if ssr1 <= 0 or ssr0 <= 0:
        return 0.0
    stat = y.size * np.log(ssr0 / ssr1)
    return float(10.0 * stat / x.size)


def arch_lm(x: np.ndarray, lags: int = 12) -> float:
    """R^2 of the squared demeaned series regressed on its own lags."""
    e2 = (x - x.mean()) ** 2
    lags = min(lags, x.size // 4)
    if lags < 1:
        return np.nan
    y = e2[lags:]
    X = np.column_stack([np.ones(y.size)] + [e2[lags - k : e2.size - k] for k in range(1, lags + 1)])
    _, r2 = _ols_r2(X, y)
    return float(r2)


def shape_stats(x, period: int = 1) -> dict[str, float]:
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 10:
        raise ValueError("shape statistics need at least 10 values")
    med = np.median(x)
    above = x > med
    crossings = np.count_nonzero(above[1:] != above[:-1])
    if np.ptp(x) == 0:
        bins = np.zeros(n, dtype=int)
    else:
        bins = np.minimum((10 * (x - x.min()) / np.ptp(x)).astype(int), 9)
    run = _longest_equal_run(bins)
    z = zscore(x)
    tiles = _tiles(z, _tile_width(n, period))
    return {
        "skewness": float(stats.skew(x)) if np.ptp(x) > 0 else 0.0,
        "kurtosis": float(stats.kurtosis(x, fisher=False)) if np.ptp(x) > 0 else 0.0,
        "crossing_points_fraction": crossings / (n - 1),
        "flat_spots_fraction": run / n,
        "longest_flat_run": float(run),
        "lumpiness": float(np.var([np.var(t, ddof=1) for t in tiles], ddof=1)) if len(tiles) > 1 else 0.0,
        "stability": float(np.var([t.mean() for t in tiles], ddof=1)) if len(tiles) > 1 else 0.0,
        "nonlinearity": nonlinearity(x),
        "arch_lm": arch_lm(x),
    }


def _longest_equal_run(labels: np.ndarray) -> int:
    best = cur = 1
    for i in range(1, labels.size):
        cur = cur + 1 if labels[i] == labels[i - 1] else 1
        best = max(best, cur)
    return best


def normality_stats(x) -> dict[str, float]:
    """Jarque-Bera, Anderson-Darling and Cramer-von Mises statistics against a fitted normal."""
    x = np.asarray(x, dtype=float)
    n = x.size
    sd = x.std(ddof=1)
    if sd <= 0:
        return {"jarque_bera": 0.0, "anderson_darling": 0.0, "cramer_von_mises": 0.0}
    s = stats.skew(x)
    k = stats.kurtosis(x)
    jb = n / 6.0 * (s * s + k * k / 4.0)
    u = np.sort(stats.norm.cdf((x - x.mean()) / sd))
    u = np.clip(u, 1e-300, 1 - 1e-16)
    i = np.arange(1, n + 1)
    ad = -n - np.mean((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1])))
    cvm = 1.0 / (12 * n) + np.sum((u - (2 * i - 1) / (2.0 * n)) ** 2)
    return {"jarque_bera": float(jb), "anderson_darling": float(ad), "cramer_von_mises": float(cvm)}


def _filled_trend(trend: np.ndarray) -> np.ndarray:
    ok = np.nonzero(~np.isnan(trend))[0]
    out = trend.copy()
    if ok.size == 0:
        return out
    out[: ok[0]] = trend[ok[0]]
    out[ok[-1] + 1 :] = trend[ok[-1]]
    return out


def anomaly_stats(x, period: int = 1) -> dict[str, float]:
    """MAD outlier share and IQR-fence anomalies on the decomposition remainder."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 8:
        raise ValueError("anomaly statistics need at least 8 values")
    med = np.median(x)
    mad = np.median(np.abs(x - med))
    tukey = float(np.mean(np.abs(x - med) > 3.0 * MAD_SCALE * mad))
    out = {
        "tukey_mad_fraction": tukey,
        "iqr_fraction": 0.0,
        "iqr_fraction_pos": 0.0,
        "iqr_fraction_neg": 0.0,
        "last_anomaly_pos_rel": np.nan,
        "last_anomaly_neg_rel": np.nan,
    }
    if np.ptp(x) == 0:
        return out
    dec = decompose_for_features(x, period)
    rem = x - _filled_trend(dec.trend) - dec.seasonal
    q1, q3 = np.percentile(rem, [25, 75])
    iqr = q3 - q1
    pos = rem > q3 + 1.5 * iqr
    neg = rem < q1 - 1.5 * iqr
    out["iqr_fraction_pos"] = float(pos.mean())
    out["iqr_fraction_neg"] = float(neg.mean())
    out["iqr_fraction"] = float((pos | neg).mean())
    if pos.any():
        out["last_anomaly_pos_rel"] = float(np.nonzero(pos)[0][-1] / (n - 1))
    if neg.any():
        out["last_anomaly_neg_rel"] = float(np.nonzero(neg)[0][-1] / (n - 1))
    return out


def drawdown_stats(x) -> dict[str, float]:
    """Mean depth (relative to the series range) and mean length of drawdown episodes."""
    x = np.asarray(x, dtype=float)
    rng = np.ptp(x)
    if rng == 0:
        return {"drawdown_mean_depth": 0.0, "drawdown_mean_length": 0.0}
    dd = (np.maximum.accumulate(x) - x) / rng
    depths, lengths = [], []
    cur_len, cur_depth = 0, 0.0
    for v in dd:
        if v > 0:
            cur_len += 1
            cur_depth = max(cur_depth, v)
        elif cur_len:
            depths.append(cur_depth)
            lengths.append(cur_len)
            cur_len, cur_depth = 0, 0.0
    if cur_len:
        depths.append(cur_depth)
        lengths.append(cur_len)
    if not depths:
        return {"drawdown_mean_depth": 0.0, "drawdown_mean_length": 0.0}
    return {
        "drawdown_mean_depth": float(np.mean(depths)),
        "drawdown_mean_length": float(np.mean(lengths) / x.size),
    }
