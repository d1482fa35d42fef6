"""Seeded synthetic corpus of positive monthly-like series with mixed dynamics."""

from __future__ import annotations

import numpy as np

from .series import TimeSeries

KINDS = (
    "seasonal_trend", "seasonal_mult", "random_walk", "ar", "damped_trend",
    "intermittent", "level_shift", "growth",
)


def _season(rng, m: int) -> np.ndarray:
    s = np.zeros(m)
    for k in range(1, 1 + rng.integers(1, 3)):
        s += rng.normal() * np.sin(2 * np.pi * k * np.arange(m) / m + rng.uniform(0, 2 * np.pi))
    return s / max(np.abs(s).max(), 1e-9)


def _one(rng, kind: str, n: int, m: int) -> np.ndarray:
    t = np.arange(n, dtype=float)
    level = rng.uniform(500, 8000)
    noise = rng.normal(size=n)
    if kind == "seasonal_trend":
        amp = level * rng.uniform(0.05, 0.3)
        y = level + level * rng.uniform(-0.004, 0.01) * t + amp * _season(rng, m)[t.astype(int) % m]
        y += noise * amp * rng.uniform(0.1, 0.5)
    elif kind == "seasonal_mult":
        growth = level * rng.uniform(0.0, 0.01) * t
        y = (level + growth) * (1 + rng.uniform(0.1, 0.35) * _season(rng, m)[t.astype(int) % m])
        y *= 1 + noise * rng.uniform(0.01, 0.06)
    elif kind == "random_walk":
        y = level + np.cumsum(rng.normal(rng.uniform(-0.002, 0.006) * level, 0.03 * level, n))
    elif kind == "ar":
        phi = rng.uniform(0.2, 0.9)
        e = noise * level * rng.uniform(0.02, 0.08)
        x = np.zeros(n)
        for i in range(1, n):
            x[i] = phi * x[i - 1] + e[i]
        y = level + x
    elif kind == "damped_trend":
        phi = rng.uniform(0.9, 0.99)
        slope = level * rng.uniform(-0.02, 0.03)
        y = level + slope * np.cumsum(phi ** t) + noise * level * rng.uniform(0.01, 0.05)
    elif kind == "intermittent":
        p = rng.uniform(0.3, 0.8)
        size = rng.uniform(5, 50)
        y = (rng.random(n) < p) * np.maximum(rng.normal(size, size * 0.3, n), 1.0)
        y += 1.0
    elif kind == "level_shift":
        shift_at = rng.integers(n // 4, 3 * n // 4)
        y = level + (t >= shift_at) * level * rng.uniform(-0.3, 0.5)
        y += noise * level * rng.uniform(0.01, 0.05)
    elif kind == "growth":
        y = level * np.exp(rng.uniform(0.002, 0.02) * t) * (1 + noise * rng.uniform(0.005, 0.03))
    else:
        raise ValueError(kind)
    lo = y.min()
    if lo <= 10.0:
        y = y - lo + 10.0
    return np.round(y, 2)


def synthetic_corpus(
    n_series: int = 300, seed: int = 0, frequency: str = "monthly",
    min_length: int = 48, max_length: int = 180,
) -> list[TimeSeries]:
    """Each series uses its own child stream, so a prefix of the corpus is stable in ``n_series``."""
    period = {"daily": 7, "weekly": 52, "monthly": 12}[frequency]
    children = np.random.SeedSequence([int(seed), 0x5E7]).spawn(n_series)
    out = []
    for i, ss in enumerate(children):
        rng = np.random.default_rng(ss)
        kind = KINDS[rng.integers(len(KINDS))]
        n = int(rng.integers(min_length, max_length + 1))
        out.append(TimeSeries(f"S{i + 1:05d}", frequency, _one(rng, kind, n, period)))
    return out
