"""Automatic (S)ARIMA: KPSS differencing, stepwise AICc search, CSS estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import signal

from ..decompose import classical
from ..features.stationarity import kpss

KPSS_CRITICAL = 0.463
SEASONAL_STRENGTH_THRESHOLD = 0.64
MAX_P = MAX_Q = 5
MAX_SP = MAX_SQ = 1
MAX_D = 2
MIN_LENGTH = 10
ROOT_MARGIN = 1.001


@dataclass(frozen=True)
class Order:
    p: int
    q: int
    P: int = 0
    Q: int = 0
    constant: bool = False

    def n_coef(self) -> int:
        return self.p + self.q + self.P + self.Q + int(self.constant)


@dataclass
class ArimaFit:
    order: Order
    d: int
    D: int
    period: int
    ar: np.ndarray  # full expanded AR polynomial, leading 1 (phi(B) form: 1 - ...)
    ma: np.ndarray  # full expanded MA polynomial, leading 1
    mean: float
    sigma2: float
    aicc: float
    n_eff: int
    coefs: np.ndarray = field(repr=False)
    ncond: int = 0
    w: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    history: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)


def diff_poly(d: int, D: int, m: int) -> np.ndarray:
    """Coefficients of (1 - B)^d (1 - B^m)^D in increasing powers of B."""
    poly = np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    seasonal = np.zeros(m + 1)
    seasonal[0], seasonal[-1] = 1.0, -1.0
    for _ in range(D):
        poly = np.convolve(poly, seasonal)
    return poly


def difference(y: np.ndarray, d: int, D: int, m: int) -> np.ndarray:
    poly = diff_poly(d, D, m)
    if poly.size == 1:
        return y.copy()
    return np.convolve(y, poly, mode="valid")


def integrate(history: np.ndarray, w_future: np.ndarray, d: int, D: int, m: int) -> np.ndarray:
    """Invert differencing: y_t = w_t - sum_{j>=1} delta_j y_{t-j}."""
    poly = diff_poly(d, D, m)
    k = poly.size - 1
    if k == 0:
        return w_future.copy()
    buf = list(history[-k:])
    out = np.empty(w_future.size)
    for i, w in enumerate(w_future):
        val = w - sum(poly[j] * buf[-j] for j in range(1, k + 1))
        buf.append(val)
        out[i] = val
    return out


def _expand(order: Order, m: int, coefs: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    p, q, P, Q = order.p, order.q, order.P, order.Q
    phi = coefs[:p]
    theta = coefs[p : p + q]
    Phi = coefs[p + q : p + q + P]
    Theta = coefs[p + q + P : p + q + P + Q]
    mu = coefs[-1] if order.constant else 0.0
    ar = np.concatenate([[1.0], -phi])
    ma = np.concatenate([[1.0], theta])
    if P:
        sar = np.zeros(m * P + 1)
        sar[0] = 1.0
        sar[m :: m] = -Phi
        ar = np.convolve(ar, sar)
    if Q:
        sma = np.zeros(m * Q + 1)
        sma[0] = 1.0
        sma[m :: m] = Theta
        ma = np.convolve(ma, sma)
    return ar, ma, mu


def _residuals(w: np.ndarray, ar: np.ndarray, ma: np.ndarray, mu: float, ncond: int) -> np.ndarray:
    x = w - mu
    pa = ar.size - 1
    u = np.convolve(x, ar, mode="valid") if pa else x
    e = signal.lfilter([1.0], ma, u)
    return e[ncond - pa :]


@njit(cache=True)
def _css_resid(w, coefs, p, q, P, Q, const, m, ncond):
    # expand (1 - phi(B))(1 - Phi(B^m)) and (1 + theta(B))(1 + Theta(B^m))
    pa = p + m * P
    qa = q + m * Q
    ar = np.zeros(pa + 1)
    ma = np.zeros(qa + 1)
    ar[0] = 1.0
    ma[0] = 1.0
    for i in range(p):
        ar[i + 1] = -coefs[i]
    for i in range(q):
        ma[i + 1] = coefs[p + i]
    if P:
        base = ar[: p + 1].copy()
        Phi = coefs[p + q]
        for i in range(p + 1):
            ar[i + m] -= Phi * base[i]
    if Q:
        base = ma[: q + 1].copy()
        Theta = coefs[p + q + P]
        for i in range(q + 1):
            ma[i + m] += Theta * base[i]
    mu = coefs[p + q + P + Q] if const else 0.0
    n = w.size
    e = np.zeros(n)
    for t in range(pa, n):
        v = 0.0
        for j in range(pa + 1):
            v += ar[j] * (w[t - j] - mu)
        for j in range(1, qa + 1):
            if t - j >= pa:
                v -= ma[j] * e[t - j]
        e[t] = v
    out = e[ncond:]
    for i in range(out.size):
        if not np.isfinite(out[i]) or abs(out[i]) > 1e150:
            out[i] = 1e10
    return out


@njit(cache=True)
def _css_jac(w, coefs, p, q, P, Q, const, m, ncond):
    base = _css_resid(w, coefs, p, q, P, Q, const, m, ncond)
    k = coefs.size
    J = np.empty((base.size, k))
    c = coefs.copy()
    for i in range(k):
        step = 1e-7 * (1.0 + abs(c[i]))
        c[i] += step
        J[:, i] = (_css_resid(w, c, p, q, P, Q, const, m, ncond) - base) / step
        c[i] = coefs[i]
    return J


@njit(cache=True)
def _css_lm(w, x0, p, q, P, Q, const, m, ncond, max_iter):
    """Levenberg-Marquardt on the conditional residuals."""
    c = x0.copy()
    e = _css_resid(w, c, p, q, P, Q, const, m, ncond)
    sse = np.dot(e, e)
    lam = 1e-3
    k = c.size
    for _ in range(max_iter):
        J = _css_jac(w, c, p, q, P, Q, const, m, ncond)
        A = J.T @ J
        g = J.T @ e
        accepted = False
        for _ in range(30):
            M = A.copy()
            for i in range(k):
                M[i, i] += lam * (A[i, i] + 1e-12)
            step = np.linalg.solve(M, -g)
            cn = c + step
            en = _css_resid(w, cn, p, q, P, Q, const, m, ncond)
            ssen = np.dot(en, en)
            if ssen < sse:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break
        rel = (sse - ssen) / max(sse, 1e-300)
        c, e, sse = cn, en, ssen
        lam = max(lam / 10.0, 1e-12)
        if rel < 1e-10 or np.max(np.abs(step)) < 1e-9 * (1.0 + np.max(np.abs(c))):
            break
    return c


def _stable(poly: np.ndarray) -> bool:
    if poly.size <= 1 or not np.any(poly[1:]):
        return True
    roots = np.roots(poly[::-1])
    return bool(np.all(np.abs(roots) > ROOT_MARGIN))


def fit_css(w: np.ndarray, order: Order, m: int, ncond: int) -> ArimaFit | None:
    """Conditional sum of squares fit; None if the fit is non-stationary or non-invertible."""
    k = order.n_coef()
    n_eff = w.size - ncond
    if n_eff - k - 2 <= 0:
        return None
    x0 = np.zeros(k)
    if order.constant:
        x0[-1] = w.mean()

    args = (w, order.p, order.q, order.P, order.Q, order.constant, m, ncond)

    if k == 0:
        coefs = x0
    else:
        coefs = _css_lm(w, x0, *args[1:], 200)
    ar, ma, mu = _expand(order, m, coefs)
    if not (_stable(ar) and _stable(ma)):
        return None
    e = _residuals(w, ar, ma, mu, ncond)
    sse = float(e @ e)
    if not np.isfinite(sse):
        return None
    scale = max(1.0, float(np.mean(w * w)))
    sse = max(sse, 1e-20 * n_eff * scale)
    kk = k + 1
    aicc = n_eff * np.log(sse / n_eff) + 2 * kk + 2 * kk * (kk + 1) / (n_eff - kk - 1)
    return ArimaFit(order, 0, 0, m, ar, ma, mu, sse / n_eff, float(aicc), n_eff, coefs, ncond, w)


def choose_d(y: np.ndarray, max_d: int = MAX_D) -> int:
    """Difference while the KPSS level statistic exceeds its 5% critical value."""
    d = 0
    x = y
    while d < max_d and x.size > 4:
        stat = kpss(x)
        if not (np.isfinite(stat) and stat > KPSS_CRITICAL):
            break
        x = np.diff(x)
        d += 1
    return d


def seasonal_strength(y: np.ndarray, m: int) -> float:
    if m < 2 or y.size < 2 * m:
        return 0.0
    dec = classical(y, m)
    keep = dec.interior
    rem = dec.remainder[keep]
    den = np.var(dec.seasonal[keep] + rem, ddof=1)
    if den <= 1e-12:
        return 0.0
    return float(max(0.0, 1.0 - np.var(rem, ddof=1) / den))


def choose_D(y: np.ndarray, m: int) -> int:
    if m < 2 or y.size < 3 * m:
        return 0
    return int(seasonal_strength(y, m) >= SEASONAL_STRENGTH_THRESHOLD)


def _neighbours(o: Order, seasonal: bool, allow_const: bool) -> list[Order]:
    out = []
    for dp, dq in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)):
        out.append(Order(o.p + dp, o.q + dq, o.P, o.Q, o.constant))
    if seasonal:
        for dP, dQ in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)):
            out.append(Order(o.p, o.q, o.P + dP, o.Q + dQ, o.constant))
    if allow_const:
        out.append(Order(o.p, o.q, o.P, o.Q, not o.constant))
    return [
        c for c in out
        if 0 <= c.p <= MAX_P and 0 <= c.q <= MAX_Q and 0 <= c.P <= MAX_SP and 0 <= c.Q <= MAX_SQ
    ]


def arima_auto(y, period: int = 1, seasonal: bool = False, max_models: int = 94) -> ArimaFit:
    """Stepwise order search minimizing AICc.

    ``seasonal`` is a hard switch: the non-seasonal variant never searches
    seasonal orders or differences. Raises ValueError when nothing can be fit.
    """
    y = np.asarray(y, dtype=float)
    if y.size < MIN_LENGTH:
        raise ValueError(f"ARIMA needs at least {MIN_LENGTH} values")
    m = period if seasonal and period > 1 else 1
    seasonal = m > 1
    D = choose_D(y, m) if seasonal else 0
    d = choose_d(difference(y, 0, D, m))
    w = difference(y, d, D, m)
    diff_period = m
    if seasonal and w.size < 3 * m:
        seasonal, m = False, 1
    allow_const = d + D <= 1
    ncond = MAX_P + (m * MAX_SP if seasonal else 0)
    ncond = min(ncond, max(0, w.size - 8))

    cache: dict[Order, ArimaFit | None] = {}

    def fit(o: Order) -> ArimaFit | None:
        if o not in cache:
            if o.p + m * o.P > ncond:
                cache[o] = None
            else:
                cache[o] = fit_css(w, o, m, ncond)
        return cache[o]

    c = allow_const
    starts = [Order(2, 2, int(seasonal), int(seasonal), c), Order(0, 0, 0, 0, c),
              Order(1, 0, int(seasonal), 0, c), Order(0, 1, 0, int(seasonal), c)]
    if allow_const:
        starts.append(Order(0, 0, 0, 0, False))
    best: ArimaFit | None = None
    for o in starts:
        f = fit(o)
        if f is not None and (best is None or f.aicc < best.aicc):
            best = f
    if best is None:
        raise ValueError("no ARIMA candidate could be fit")
    improved = True
    while improved and len(cache) < max_models:
        improved = False
        for o in _neighbours(best.order, seasonal, allow_const):
            f = fit(o)
            if f is not None and f.aicc < best.aicc - 1e-9:
                best = f
                improved = True
                break
    best.d, best.D, best.period = d, D, diff_period
    best.history = y
    return best


def arima_forecast(fit: ArimaFit, h: int) -> np.ndarray:
    """Recursive substitution on the differenced scale, then integration."""
    w = fit.w
    ar, ma, mu = fit.ar, fit.ma, fit.mean
    x = w - mu
    pa, qa = ar.size - 1, ma.size - 1
    # ``period`` holds the differencing period; ar/ma are already expanded
    e_full = np.zeros(w.size)
    e_tail = _residuals(w, ar, ma, mu, fit.ncond)
    e_full[w.size - e_tail.size :] = e_tail
    xs = list(x)
    es = list(e_full)
    for _ in range(h):
        t = len(xs)
        val = 0.0
        for j in range(1, pa + 1):
            if t - j >= 0:
                val -= ar[j] * xs[t - j]
        for j in range(1, qa + 1):
            if t - j >= 0:
                val += ma[j] * es[t - j]
        xs.append(val)
        es.append(0.0)
    w_future = np.asarray(xs[w.size :]) + mu
    return integrate(fit.history, w_future, fit.d, fit.D, fit.period)


def auto_forecast(y, h: int, period: int = 1, seasonal: bool = False) -> np.ndarray:
    return arima_forecast(arima_auto(y, period, seasonal), h)
