"""Helpers that read artifacts of a finished experiment run."""

from __future__ import annotations

from pathlib import Path

from fcassist.config import Config
from fcassist.ensemble import rank_pool
from fcassist.experiment import read_features, read_ranks, read_segments
from fcassist.forest import fit_forest
from fcassist.metadata import assemble_a1
from fcassist.pipeline import Workdir


def debug_top1_accuracy(root: Path, cfg: Config, n_segments: int = 50) -> tuple[float, int]:
    """Fit a single unbootstrapped, fully grown A1 on ``n_segments`` segments and
    score how often its top pick is the true rank-1 model on those same segments."""
    wd = Workdir(root, cfg)
    _, segments = read_segments(wd)
    segments = segments[:n_segments]
    features = read_features(wd)
    ranks = read_ranks(wd)
    data = assemble_a1(segments, features, ranks, cfg.models)
    a1 = fit_forest(
        data.X, data.y, data.columns, mtry=data.X.shape[1], min_node_size=1, seed=0,
        always_split=data.always_split, objective="rmsle", n_trees=1, bootstrap=False,
    )
    hits = 0
    for seg in segments:
        best = next(r.model_id for r in ranks[seg.segment_id] if r.final_rank == 1)
        top = rank_pool(a1, features[seg.segment_id], seg.horizon, seg.frequency, cfg.models)[0][0]
        hits += top == best
    return hits / len(segments), len(segments)
