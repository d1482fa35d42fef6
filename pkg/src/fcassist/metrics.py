"""Forecast errors, multi-metric rank aggregation and the optimal ensemble size."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, TextIO

import numpy as np
from scipy.stats import rankdata

from .pooling import cumulative_pools
from .series import TimeSeries

METRICS = ("rmse", "mae", "mdae", "smape", "maape", "mase")
RANK_COLUMNS = ("segment_id", "model_id") + METRICS + ("runtime_ms", "mean_rank", "final_rank")
# errors are compared after rounding to this many significant digits, so that
# forecasts equal up to summation order tie
RANK_DIGITS = 12


def mase_lag(frequency: str) -> int:
    return 12 if frequency == "monthly" else 1


def mase_scale(train, lag: int) -> float:
    y = np.asarray(train, dtype=float)
    if y.size < lag + 1:
        raise ValueError(f"MASE with lag {lag} needs at least {lag + 1} training values")
    return float(np.mean(np.abs(y[lag:] - y[:-lag])))


def error_vector(actual, forecast, scale: float) -> dict[str, float]:
    """Six errors given a precomputed MASE scale (NaN when the scale is zero)."""
    A = np.asarray(actual, dtype=float)
    F = np.asarray(forecast, dtype=float)
    if A.shape != F.shape or A.ndim != 1 or A.size == 0:
        raise ValueError("actual and forecast must be equal-length non-empty vectors")
    e = A - F
    ae = np.abs(e)
    denom = np.abs(A) + np.abs(F)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        smape_terms = np.where(denom > 0, ae / denom, 0.0)
        ape = np.where(A != 0, np.arctan(ae / np.abs(A)), np.where(ae > 0, np.pi / 2, 0.0))
    mae = float(ae.mean())
    return {
        "rmse": float(np.sqrt(np.mean(e * e))),
        "mae": mae,
        "mdae": float(np.median(ae)),
        "smape": float(200.0 * smape_terms.mean()),
        "maape": float(100.0 * ape.mean()),
        "mase": mae / scale if scale > 0 else np.nan,
    }


def compute_errors(actual, forecast, train: TimeSeries) -> dict[str, float]:
    return error_vector(actual, forecast, mase_scale(train.values, mase_lag(train.frequency)))


def _round_sig(x: np.ndarray) -> np.ndarray:
    out = x.astype(float).copy()
    # values outside the normal range are compared as they are
    ok = np.isfinite(out) & (np.abs(out) >= 1e-280) & (np.abs(out) <= 1e280)
    mag = np.floor(np.log10(np.abs(out[ok])))
    factor = 10.0 ** (RANK_DIGITS - 1 - mag)
    out[ok] = np.round(out[ok] * factor) / factor
    return out


def metric_rank_sums(errors: np.ndarray) -> np.ndarray:
    """Sum over metric columns of average ranks; NaN takes the worst rank on its column.

    Ranks are multiples of 1/2, so the sums are exact in floating point.
    """
    E = np.asarray(errors, dtype=float)
    total = np.zeros(E.shape[0])
    for j in range(E.shape[1]):
        col = _round_sig(E[:, j])
        col[~np.isfinite(col)] = np.inf
        total += rankdata(col, method="average")
    return total


@dataclass
class RankRow:
    model_id: str
    errors: dict[str, float]
    runtime_ms: float
    mean_rank: float
    final_rank: int


def rank_models(rows: Mapping[str, tuple[Mapping[str, float], float]]) -> list[RankRow]:
    """Aggregate per-metric ranks; ties go to the faster model, then model_id.

    Returns rows ordered by final rank.
    """
    if len(rows) < 2:
        raise ValueError("ranking needs at least two models")
    ids = list(rows)
    E = np.array([[rows[m][0][k] for k in METRICS] for m in ids], dtype=float)
    sums = metric_rank_sums(E)
    runtimes = [float(rows[m][1]) for m in ids]
    order = sorted(range(len(ids)), key=lambda i: (sums[i], runtimes[i], ids[i]))
    return [
        RankRow(ids[i], dict(zip(METRICS, E[i])), runtimes[i], float(sums[i]) / len(METRICS), r)
        for r, i in enumerate(order, start=1)
    ]


def optimal_ensemble_size(ranked_forecasts, actual, train: TimeSeries, mode: str = "simple") -> int:
    """Best k for pooling the top-k forecasts; ties go to the smaller k."""
    scale = mase_scale(train.values, mase_lag(train.frequency))
    return optimal_size_from_scale(ranked_forecasts, actual, scale, mode)


def optimal_size_from_scale(ranked_forecasts, actual, scale: float, mode: str = "simple") -> int:
    pools = cumulative_pools(ranked_forecasts, mode)
    if pools.shape[0] == 1:
        return 1
    E = np.array([[error_vector(actual, p, scale)[k] for k in METRICS] for p in pools])
    sums = metric_rank_sums(E)
    # argmin returns the first minimum, i.e. the smallest k
    return int(np.argmin(sums)) + 1


def write_rank_table(stream: TextIO, table: Iterable[tuple[str, list[RankRow]]]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(RANK_COLUMNS)
    for segment_id, rows in table:
        for r in rows:
            w.writerow(
                [segment_id, r.model_id]
                + [repr(float(r.errors[k])) for k in METRICS]
                + [repr(float(r.runtime_ms)), repr(float(r.mean_rank)), r.final_rank]
            )


def read_rank_table(stream: TextIO) -> dict[str, list[RankRow]]:
    out: dict[str, list[RankRow]] = {}
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != RANK_COLUMNS:
        raise ValueError(f"unexpected rank table header {reader.fieldnames}")
    for row in reader:
        out.setdefault(row["segment_id"], []).append(
            RankRow(
                row["model_id"],
                {k: float(row[k]) for k in METRICS},
                float(row["runtime_ms"]),
                float(row["mean_rank"]),
                int(row["final_rank"]),
            )
        )
    for rows in out.values():
        rows.sort(key=lambda r: r.final_rank)
    return out
