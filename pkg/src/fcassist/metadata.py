"""Training tables for the ranker (A1) and the capper (A2)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .features import FEATURE_NAMES, META_NAMES, meta_features
from .metrics import RankRow
from .models import MODEL_IDS, spec

CAPABILITY_NAMES = ("cap_seasonal", "cap_complex", "cap_decomposition")


class AssemblyError(KeyError):
    """A segment or (segment, model) entry needed for assembly is missing."""


def model_columns(models: Sequence[str] = MODEL_IDS) -> tuple[str, ...]:
    return tuple(f"model={m}" for m in models)


def a1_columns(models: Sequence[str] = MODEL_IDS) -> tuple[str, ...]:
    return FEATURE_NAMES + META_NAMES + model_columns(models) + CAPABILITY_NAMES


def a2_columns() -> tuple[str, ...]:
    return FEATURE_NAMES + META_NAMES


def a1_always_split(models: Sequence[str] = MODEL_IDS) -> tuple[str, ...]:
    return META_NAMES + model_columns(models) + CAPABILITY_NAMES


A2_ALWAYS_SPLIT = META_NAMES


@dataclass
class MetaDataset:
    columns: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    always_split: tuple[str, ...]
    keys: list[tuple[str, ...]]  # (segment_id,) or (segment_id, model_id) per row

    def __len__(self) -> int:
        return self.y.size


def _feature_block(features: Mapping[str, float]) -> np.ndarray:
    return np.array([features[name] for name in FEATURE_NAMES], dtype=float)


def a2_row(features: Mapping[str, float], horizon: int, frequency: str) -> np.ndarray:
    meta = meta_features(horizon, frequency)
    return np.concatenate([_feature_block(features), [meta[k] for k in META_NAMES]])


def a1_rows(
    features: Mapping[str, float], horizon: int, frequency: str,
    models: Sequence[str] = MODEL_IDS,
) -> np.ndarray:
    """One row per model: shared features, one-hot model identity, capability flags."""
    base = a2_row(features, horizon, frequency)
    P = len(models)
    out = np.empty((P, base.size + P + len(CAPABILITY_NAMES)))
    for i, m in enumerate(models):
        s = spec(m)
        onehot = np.zeros(P)
        onehot[i] = 1.0
        out[i] = np.concatenate([base, onehot, [s.seasonal, s.complex, s.decomposition]])
    return out


def _lookup(table: Mapping, key: str, what: str):
    try:
        return table[key]
    except KeyError:
        raise AssemblyError(f"missing {what} for segment {key!r}") from None


def assemble_a1(
    segments, features: Mapping[str, Mapping[str, float]],
    rank_tables: Mapping[str, Sequence[RankRow]], models: Sequence[str] = MODEL_IDS,
) -> MetaDataset:
    """Rows ordered by segment then catalog model; target = final rank."""
    blocks, targets, keys = [], [], []
    for seg in segments:
        feats = _lookup(features, seg.segment_id, "features")
        ranks = {r.model_id: r.final_rank for r in _lookup(rank_tables, seg.segment_id, "rank table")}
        for m in models:
            if m not in ranks:
                raise AssemblyError(f"missing rank row for segment {seg.segment_id!r}, model {m!r}")
            targets.append(float(ranks[m]))
            keys.append((seg.segment_id, m))
        blocks.append(a1_rows(feats, seg.horizon, seg.frequency, models))
    cols = a1_columns(models)
    X = np.vstack(blocks) if blocks else np.empty((0, len(cols)))
    return MetaDataset(cols, X, np.asarray(targets), a1_always_split(models), keys)


def assemble_a2(
    segments, features: Mapping[str, Mapping[str, float]], k_targets: Mapping[str, int],
) -> MetaDataset:
    """One row per segment; target = optimal ensemble size for one pooling mode."""
    rows, targets, keys = [], [], []
    for seg in segments:
        feats = _lookup(features, seg.segment_id, "features")
        targets.append(float(_lookup(k_targets, seg.segment_id, "ensemble-size target")))
        rows.append(a2_row(feats, seg.horizon, seg.frequency))
        keys.append((seg.segment_id,))
    cols = a2_columns()
    X = np.vstack(rows) if rows else np.empty((0, len(cols)))
    return MetaDataset(cols, X, np.asarray(targets), A2_ALWAYS_SPLIT, keys)
