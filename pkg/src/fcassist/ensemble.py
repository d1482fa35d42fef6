"""Serving: rank the pool with A1, cap it with A2 and pool the top forecasts."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, TextIO

import numpy as np

from .features import compute_features
from .forest import Forest, SchemaError
from .metadata import a1_columns, a1_rows, a2_columns, a2_row
from .models import MODEL_IDS, fit_and_forecast
from .pooling import MODES, reciprocal_rank_weights
from .series import TimeSeries


@dataclass
class EnsembleRecommendation:
    ranked_models: list[tuple[str, float]]
    k: int
    weights: np.ndarray
    pooled_forecast: np.ndarray
    mode: str
    statuses: list[str] | None = None

    def to_json(self) -> str:
        doc = {
            "mode": self.mode,
            "k": self.k,
            "ranked_models": [{"model_id": m, "score": float(s)} for m, s in self.ranked_models],
            "weights": [float(w) for w in self.weights],
            "forecast": [float(v) for v in self.pooled_forecast],
        }
        if self.statuses is not None:
            doc["member_status"] = dict(zip([m for m, _ in self.ranked_models[: self.k]], self.statuses))
        return json.dumps(doc, indent=2)

    def write_forecast_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["step", "value"])
        for i, v in enumerate(self.pooled_forecast, start=1):
            w.writerow([i, repr(float(v))])


def _check_schema(forest: Forest, expected: Sequence[str], name: str) -> None:
    if tuple(forest.columns) != tuple(expected):
        raise SchemaError(f"{name} column catalog does not match this feature registry / pool")


def rank_pool(
    a1: Forest, features: Mapping[str, float], horizon: int, frequency: str,
    models: Sequence[str] = MODEL_IDS,
) -> list[tuple[str, float]]:
    """Models sorted by predicted rank; equal scores keep catalog order."""
    _check_schema(a1, a1_columns(models), "A1")
    scores = a1.predict(a1_rows(features, horizon, frequency, models))
    order = sorted(range(len(models)), key=lambda i: (scores[i], i))
    return [(models[i], float(scores[i])) for i in order]


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def recommend_size(
    a2: Forest, features: Mapping[str, float], horizon: int, frequency: str, n_models: int,
) -> int:
    _check_schema(a2, a2_columns(), "A2")
    pred = float(a2.predict(a2_row(features, horizon, frequency))[0])
    return clamp_size(pred, n_models)


def clamp_size(prediction: float, n_models: int) -> int:
    return min(max(round_half_up(prediction), 1), n_models)


def ensemble_weights(k: int, mode: str) -> np.ndarray:
    if mode == "simple":
        return np.full(k, 1.0 / k)
    if mode == "weighted":
        return reciprocal_rank_weights(k)
    raise ValueError(f"unknown pooling mode {mode!r}; expected one of {MODES}")


def pool_forecasts(forecasts, weights) -> np.ndarray:
    F = np.asarray(forecasts, dtype=float)
    w = np.asarray(weights, dtype=float)
    if F.ndim != 2 or F.shape[0] != w.size:
        raise ValueError(f"{w.size} weights for {F.shape[0] if F.ndim == 2 else 0} forecasts")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    return w @ F


def combine(ranked: Sequence[str], k: int, mode: str, forecasts: Mapping[str, np.ndarray]) -> np.ndarray:
    """Pool precomputed forecasts of the top ``k`` ranked models."""
    return pool_forecasts([forecasts[m] for m in ranked[:k]], ensemble_weights(k, mode))


def forecast(
    series: TimeSeries, horizon: int, a1: Forest, a2: Forest, mode: str = "weighted",
    models: Sequence[str] = MODEL_IDS,
) -> EnsembleRecommendation:
    """End-to-end recommendation for a new series."""
    if mode not in MODES:
        raise ValueError(f"unknown pooling mode {mode!r}")
    feats = compute_features(series)
    ranked = rank_pool(a1, feats, horizon, series.frequency, models)
    k = recommend_size(a2, feats, horizon, series.frequency, len(models))
    outs = [fit_and_forecast(m, series, horizon) for m, _ in ranked[:k]]
    weights = ensemble_weights(k, mode)
    pooled = pool_forecasts([o.point_forecast for o in outs], weights)
    return EnsembleRecommendation(ranked, k, weights, pooled, mode, [o.status for o in outs])
