"""Cumulative pooling of ranked forecasts."""

from __future__ import annotations

import numpy as np

MODES = ("simple", "weighted")


def reciprocal_rank_weights(k: int) -> np.ndarray:
    """w_i = (1/i) / sum_{j<=k} 1/j for i = 1..k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    w = 1.0 / np.arange(1, k + 1)
    return w / w.sum()


def pool(forecasts, k: int, mode: str = "simple") -> np.ndarray:
    """Combine the first ``k`` rows of ``forecasts`` (ordered best first)."""
    F = np.asarray(forecasts, dtype=float)
    if F.ndim != 2 or not 1 <= k <= F.shape[0]:
        raise ValueError(f"cannot pool top {k} of {F.shape[0] if F.ndim == 2 else 0} forecasts")
    if mode == "simple":
        return F[:k].mean(axis=0)
    if mode == "weighted":
        return reciprocal_rank_weights(k) @ F[:k]
    raise ValueError(f"unknown pooling mode {mode!r}")


def cumulative_pools(forecasts, mode: str = "simple") -> np.ndarray:
    """Row k-1 holds the pool of the top k forecasts, for k = 1..P."""
    F = np.asarray(forecasts, dtype=float)
    return np.array([pool(F, k, mode) for k in range(1, F.shape[0] + 1)])
