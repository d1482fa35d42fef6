"""Independent reference implementations used by the oracle tests.

Everything here is written directly from the definitions with plain loops and
shares no code with the package.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

METRICS = ("rmse", "mae", "mdae", "smape", "maape", "mase")


def naive_errors(actual, forecast, train, lag):
    A = [float(a) for a in actual]
    F = [float(f) for f in forecast]
    h = len(A)
    abs_err = [abs(a - f) for a, f in zip(A, F)]
    srt = sorted(abs_err)
    mid = h // 2
    mdae = srt[mid] if h % 2 else (srt[mid - 1] + srt[mid]) / 2
    smape = 0.0
    maape = 0.0
    for a, f in zip(A, F):
        d = abs(a) + abs(f)
        smape += 0.0 if d == 0 else abs(f - a) / d
        if a == 0:
            maape += 0.0 if f == 0 else math.pi / 2
        else:
            maape += math.atan(abs((a - f) / a))
    tr = [float(v) for v in train]
    diffs = [abs(tr[t] - tr[t - lag]) for t in range(lag, len(tr))]
    scale = sum(diffs) / len(diffs)
    mae = sum(abs_err) / h
    return {
        "rmse": math.sqrt(sum(e * e for e in abs_err) / h),
        "mae": mae,
        "mdae": mdae,
        "smape": 200.0 * smape / h,
        "maape": 100.0 * maape / h,
        "mase": mae / scale if scale > 0 else math.nan,
    }


def round12(x: float) -> float:
    """12 significant digits, the resolution at which errors count as tied."""
    if not math.isfinite(x) or x == 0:
        return x
    return float(f"{x:.11e}")


def average_ranks(values):
    """Competition ranks with ties sharing the mean rank; NaN ranks last."""
    keyed = [math.inf if not math.isfinite(v) else round12(v) for v in values]
    out = []
    for v in keyed:
        less = sum(1 for w in keyed if w < v)
        equal = sum(1 for w in keyed if w == v)
        out.append(Fraction(2 * less + equal + 1, 2))
    return out


def naive_rank(rows):
    """rows: {model_id: (errors dict, runtime)} -> list of (model_id, mean_rank) best first."""
    ids = list(rows)
    per_metric = {k: average_ranks([rows[m][0][k] for m in ids]) for k in METRICS}
    mean = {m: sum(per_metric[k][i] for k in METRICS) / len(METRICS) for i, m in enumerate(ids)}
    order = sorted(ids, key=lambda m: (mean[m], rows[m][1], m))
    return [(m, mean[m]) for m in order]


def naive_pool(forecasts, k, mode):
    h = len(forecasts[0])
    if mode == "simple":
        out = []
        for t in range(h):
            acc = 0.0
            for i in range(k):
                acc += forecasts[i][t]
            out.append(acc / k)
        return out
    norm = sum(1.0 / j for j in range(1, k + 1))
    w = [(1.0 / i) / norm for i in range(1, k + 1)]
    return [sum(w[i] * forecasts[i][t] for i in range(k)) for t in range(h)]


def brute_force_k(forecasts, actual, train, lag, mode):
    P = len(forecasts)
    if P == 1:
        return 1
    pooled = [naive_pool(forecasts, k, mode) for k in range(1, P + 1)]
    errs = [naive_errors(actual, p, train, lag) for p in pooled]
    per_metric = {m: average_ranks([e[m] for e in errs]) for m in METRICS}
    score = [sum(per_metric[m][i] for m in METRICS) for i in range(P)]
    best = min(score)
    return score.index(best) + 1


def exhaustive_cart(X, y, min_node=1):
    """Greedy CART by exhaustive search over every column and midpoint.

    Returns training-set predictions. Ties in split quality go to the lowest
    column, then the lowest threshold.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    pred = np.empty(y.size)

    def sse(v):
        return float(np.sum((v - v.mean()) ** 2)) if v.size else 0.0

    def grow(rows):
        yy = y[rows]
        if rows.size < 2 * min_node or np.ptp(yy) == 0:
            pred[rows] = yy.mean()
            return
        parent = sse(yy)
        scale = float(np.sum(yy) ** 2 / yy.size)
        best = None
        for c in range(X.shape[1]):
            xs = X[rows, c]
            u = np.unique(xs)
            for a, b in zip(u[:-1], u[1:]):
                t = a + (b - a) * 0.5
                if not t < b:
                    t = a
                go_left = xs <= t
                nl = int(go_left.sum())
                if nl < min_node or rows.size - nl < min_node:
                    continue
                red = parent - sse(yy[go_left]) - sse(yy[~go_left])
                if best is None or red > best[0] + 1e-12 * scale:
                    best = (red, c, t, go_left)
        if best is None or best[0] <= 1e-12 * scale:
            pred[rows] = yy.mean()
            return
        _, c, t, go_left = best
        grow(rows[go_left])
        grow(rows[~go_left])

    grow(np.arange(y.size))
    return pred


# random instance generators (shared by module and acceptance tests)

FREQS = ("daily", "weekly", "monthly")


def metric_instance(rng):
    """(actual, forecast, train values, frequency) with boundary cases mixed in."""
    h = int(rng.integers(1, 13))
    freq = FREQS[int(rng.integers(3))]
    lag = 12 if freq == "monthly" else 1
    kind = int(rng.integers(6))
    A = rng.normal(50, 30, h)
    F = A + rng.normal(0, 10, h)
    if kind == 1:  # zero actuals, some with zero forecasts (0/0 terms)
        A[rng.random(h) < 0.5] = 0.0
        F[(A == 0) & (rng.random(h) < 0.5)] = 0.0
    elif kind == 2:  # exact forecasts
        F = A.copy()
    elif kind == 3:  # signs straddling zero
        A, F = rng.normal(0, 1, h), rng.normal(0, 1, h)
    n = lag + int(rng.integers(1, 40))
    train = rng.normal(100, 20, n)
    if kind == 4:  # constant train: zero MASE scale
        train = np.full(n, 7.0)
    elif kind == 5 and lag > 1:  # lag-periodic train: zero scale too
        train = np.resize(rng.normal(size=lag), n)
    return A, F, train, freq


def rank_instance(rng):
    """{model_id: (errors, runtime)} with P <= 8 and deliberate ties."""
    P = int(rng.integers(2, 9))
    ids = [f"m{i}" for i in rng.permutation(P)]
    grid = int(rng.integers(2, 6))
    rows = {}
    for m in ids:
        errs = {k: float(rng.integers(0, grid)) for k in METRICS}
        if rng.random() < 0.15:
            errs["mase"] = math.nan
        runtime = float(rng.integers(1, 4))
        rows[m] = (errs, runtime)
    if rng.random() < 0.3:  # duplicate a model's errors outright
        a, b = ids[0], ids[-1]
        rows[b] = (dict(rows[a][0]), rows[b][1])
    return rows


def k_instance(rng):
    """(ranked forecasts P x h, actual, train, frequency, mode) with P <= 6, h <= 8."""
    P = int(rng.integers(1, 7))
    h = int(rng.integers(1, 9))
    freq = FREQS[int(rng.integers(3))]
    lag = 12 if freq == "monthly" else 1
    actual = rng.integers(-3, 10, h).astype(float)
    kind = int(rng.integers(4))
    if kind == 0:
        F = rng.integers(-3, 10, (P, h)).astype(float)
    elif kind == 1:  # all identical
        F = np.tile(rng.normal(size=h), (P, 1))
    elif kind == 2:  # cancelling errors
        F = actual + rng.choice([-1.0, 1.0], (P, 1)) * rng.integers(1, 4, (P, 1))
    else:
        F = actual + rng.normal(0, 2, (P, h))
    train = rng.integers(0, 20, lag + int(rng.integers(1, 30))).astype(float)
    mode = ("simple", "weighted")[int(rng.integers(2))]
    return F, actual, train, freq, mode


def cart_instance(rng):
    n = int(rng.integers(2, 201))
    C = int(rng.integers(1, 7))
    X = rng.normal(size=(n, C))
    for j in range(C):
        if rng.random() < 0.4:  # discrete column with repeated values
            X[:, j] = rng.integers(0, int(rng.integers(2, 8)), n)
    kind = int(rng.integers(3))
    if kind == 0:
        y = rng.normal(size=n)
    elif kind == 1:
        y = (X[:, 0] > 0).astype(float) * 3 + rng.normal(0, 0.1, n)
    else:
        y = rng.integers(0, 4, n).astype(float)
    return X, y
