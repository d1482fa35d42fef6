"""Two-fold meta-learning experiment: stages from ingestion to report tables."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import report as report_mod
from .config import Config
from .ensemble import clamp_size, combine, rank_pool
from .features import FEATURE_NAMES, compute_features
from .folds import stratified_two_fold
from .forest import Forest, fit_forest, tune
from .metadata import a2_row, assemble_a1, assemble_a2
from .metrics import (
    METRICS, RankRow, compute_errors, error_vector, mase_lag, mase_scale, optimal_size_from_scale,
    rank_models, read_rank_table, write_rank_table,
)
from .models import fit_and_forecast, spec
from .models.simple import naive
from .models.smoothing import comb_forecast
from .pipeline import Workdir, fmt, parallel_map, read_rows, write_rows
from .series import (
    PERIODS, Segment, TimeSeries, expand_augmented, expand_initial, parse_m4_csv,
    read_segments_csv, read_series_csv, write_segments_csv, write_series_csv,
)
from .synthetic import synthetic_corpus

STAGES = (
    "ingest", "expand", "features", "evaluate-pool", "targets", "train-meta", "benchmark", "report",
)
SERIES = "series.csv"
SEGMENTS = "segments.csv"
FEATURES = "features.csv"
SOURCE_FEATURES = "source_features.csv"
FORECASTS = "forecasts.csv"
RUNS = "runs.csv"
RANKS = "rank_table.csv"
TARGETS = "targets.csv"
FOLDS = "folds.csv"
TUNING = "tuning.json"
TEST_ERRORS = "test_errors.csv"
RECOMMENDATIONS = "recommendations.csv"
METHODS = ("Theta", "Comb", "Simple", "Weighted")
M4_FILES = {"daily": "Daily", "weekly": "Weekly", "monthly": "Monthly"}


def forest_name(kind: str, fold: int) -> str:
    return f"forests/{kind}_fold{fold}.json"


# ---------------------------------------------------------------- ingest / expand

def load_corpus(cfg: Config) -> list[TimeSeries]:
    out: list[TimeSeries] = []
    if cfg.source == "synthetic":
        for f in cfg.frequencies:
            out.extend(synthetic_corpus(
                cfg.n_series, cfg.seeds["corpus"], f,
                cfg.synthetic_min_length, cfg.synthetic_max_length,
            ))
        return out
    if cfg.source == "csv":
        with open(cfg.resolve(cfg.path)) as fh:
            series = [s for s in read_series_csv(fh) if s.frequency in cfg.frequencies]
        return [s for s in series if s.id not in set(cfg.exclude)]
    root = cfg.resolve(cfg.path)
    for f in cfg.frequencies:
        parts = []
        for split in ("train", "test"):
            p = root / f"{M4_FILES[f]}-{split}.csv"
            with open(p) as fh:
                parts.append(parse_m4_csv(fh, f, exclude=cfg.exclude))
        tail = {s.id: s.values for s in parts[1]}
        full = [s.with_values(np.concatenate([s.values, tail.get(s.id, [])])) for s in parts[0]]
        if 0 < cfg.n_series < len(full):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seeds["sample"], len(full)]))
            keep = np.sort(rng.choice(len(full), cfg.n_series, replace=False))
            full = [full[i] for i in keep]
        out.extend(full)
    return out


def stage_ingest(wd: Workdir) -> dict:
    series = load_corpus(wd.cfg)
    with open(wd.path(SERIES), "w", newline="") as fh:
        write_series_csv(series, fh)
    wd.record("ingest", [SERIES])
    return {"series": len(series)}


def read_series(wd: Workdir) -> list[TimeSeries]:
    wd.require(SERIES, stage="ingest")
    with open(wd.root / SERIES, newline="") as fh:
        return read_series_csv(fh)


def expand(cfg: Config, series: list[TimeSeries]) -> tuple[list[Segment], list[Segment]]:
    """(initial, final) expansions over the configured horizons."""
    initial, final = [], []
    for f in cfg.frequencies:
        group = [s for s in series if s.frequency == f]
        hs = cfg.horizons_for(f)
        initial.extend(expand_initial(group, hs))
        final.extend(expand_augmented(group, hs))
    return initial, final


def expansion_counts(segments: list[Segment]) -> dict[tuple[str, int], int]:
    out: dict[tuple[str, int], int] = {}
    for s in segments:
        out[(s.frequency, s.horizon)] = out.get((s.frequency, s.horizon), 0) + 1
    return out


def stage_expand(wd: Workdir) -> dict:
    series = read_series(wd)
    initial, final = expand(wd.cfg, series)
    with open(wd.path(SEGMENTS), "w", newline="") as fh:
        write_segments_csv(final, fh)
    wd.record("expand", [SEGMENTS], inputs=[SERIES])
    return {"initial": expansion_counts(initial), "final": expansion_counts(final)}


def read_segments(wd: Workdir) -> tuple[dict[str, TimeSeries], list[Segment]]:
    sources = {s.id: s for s in read_series(wd)}
    wd.require(SEGMENTS, stage="expand")
    with open(wd.root / SEGMENTS, newline="") as fh:
        return sources, read_segments_csv(fh, sources)


# ---------------------------------------------------------------- features

def _features_job(series: TimeSeries) -> list[float]:
    feats = compute_features(series)
    return [feats[k] for k in FEATURE_NAMES]


def stage_features(wd: Workdir, jobs: int = 1) -> dict:
    sources, segments = read_segments(wd)
    seg_rows = parallel_map(_features_job, [s.train for s in segments], jobs)
    write_rows(
        wd.path(FEATURES), ("segment_id",) + FEATURE_NAMES,
        ([s.segment_id] + [fmt(v) for v in r] for s, r in zip(segments, seg_rows)),
    )
    src_list = list(sources.values())
    src_rows = parallel_map(_features_job, src_list, jobs)
    write_rows(
        wd.path(SOURCE_FEATURES), ("source_id",) + FEATURE_NAMES,
        ([s.id] + [fmt(v) for v in r] for s, r in zip(src_list, src_rows)),
    )
    wd.record("features", [FEATURES, SOURCE_FEATURES], inputs=[SERIES, SEGMENTS])
    return {"segments": len(segments), "sources": len(src_list)}


def read_features(wd: Workdir, name: str = FEATURES) -> dict[str, dict[str, float]]:
    wd.require(name, stage="features")
    out = {}
    for row in read_rows(wd.root / name):
        key = row.pop("segment_id", None) or row.pop("source_id")
        out[key] = {k: float(v) for k, v in row.items()}
    return out


# ---------------------------------------------------------------- pool evaluation

@dataclass
class PoolResult:
    segment_id: str
    forecasts: dict[str, np.ndarray]
    runtimes: dict[str, float]
    statuses: dict[str, str]
    ranks: list[RankRow]


def _pool_job(args) -> PoolResult:
    seg, models, runtime_source = args
    scale = mase_scale(seg.train.values, mase_lag(seg.frequency))
    forecasts, runtimes, statuses, rows = {}, {}, {}, {}
    for m in models:
        out = fit_and_forecast(m, seg.train, seg.horizon)
        forecasts[m] = out.point_forecast
        runtimes[m] = out.runtime_ms
        statuses[m] = out.status
        tie = out.runtime_ms if runtime_source == "measured" else float(spec(m).nominal_cost)
        rows[m] = (error_vector(seg.test, out.point_forecast, scale), tie)
    return PoolResult(seg.segment_id, forecasts, runtimes, statuses, rank_models(rows))


def stage_evaluate_pool(wd: Workdir, jobs: int = 1) -> dict:
    _, segments = read_segments(wd)
    cfg = wd.cfg
    results = parallel_map(_pool_job, [(s, cfg.models, cfg.runtime_source) for s in segments], jobs)
    write_rows(
        wd.path(FORECASTS), ("segment_id", "model_id", "step", "value"),
        (
            (r.segment_id, m, i, fmt(v))
            for r in results for m in cfg.models for i, v in enumerate(r.forecasts[m], start=1)
        ),
    )
    write_rows(
        wd.path(RUNS), ("segment_id", "model_id", "runtime_ms", "status"),
        ((r.segment_id, m, fmt(r.runtimes[m]), r.statuses[m]) for r in results for m in cfg.models),
    )
    with open(wd.path(RANKS), "w", newline="") as fh:
        write_rank_table(fh, ((r.segment_id, r.ranks) for r in results))
    n_fallback = sum(st == "fallback" for r in results for st in r.statuses.values())
    vol = [RUNS] if cfg.runtime_source == "nominal" else [RUNS, RANKS]
    wd.record("evaluate-pool", [FORECASTS, RUNS, RANKS], volatile=vol, inputs=[SEGMENTS])
    return {"segments": len(results), "fallbacks": n_fallback}


def read_forecasts(wd: Workdir) -> dict[str, dict[str, np.ndarray]]:
    wd.require(FORECASTS, stage="evaluate-pool")
    acc: dict[str, dict[str, list[float]]] = {}
    for row in read_rows(wd.root / FORECASTS):
        acc.setdefault(row["segment_id"], {}).setdefault(row["model_id"], []).append(float(row["value"]))
    return {s: {m: np.asarray(v) for m, v in d.items()} for s, d in acc.items()}


def read_ranks(wd: Workdir) -> dict[str, list[RankRow]]:
    wd.require(RANKS, stage="evaluate-pool")
    with open(wd.root / RANKS, newline="") as fh:
        return read_rank_table(fh)


# ---------------------------------------------------------------- targets

def stage_targets(wd: Workdir) -> dict:
    _, segments = read_segments(wd)
    forecasts = read_forecasts(wd)
    ranks = read_ranks(wd)
    rows = []
    for seg in segments:
        ordered = [forecasts[seg.segment_id][r.model_id] for r in ranks[seg.segment_id]]
        scale = mase_scale(seg.train.values, mase_lag(seg.frequency))
        ks = [optimal_size_from_scale(ordered, seg.test, scale, mode) for mode in ("simple", "weighted")]
        rows.append((seg.segment_id, *ks))
    write_rows(wd.path(TARGETS), ("segment_id", "k_simple", "k_weighted"), rows)
    wd.record("targets", [TARGETS], inputs=[FORECASTS, RANKS])
    return {"segments": len(rows)}


def read_targets(wd: Workdir) -> dict[str, dict[str, int]]:
    wd.require(TARGETS, stage="targets")
    return {
        r["segment_id"]: {"simple": int(r["k_simple"]), "weighted": int(r["k_weighted"])}
        for r in read_rows(wd.root / TARGETS)
    }


# ---------------------------------------------------------------- meta-learners

def compute_folds(wd: Workdir) -> dict[str, int]:
    cfg = wd.cfg
    feats = read_features(wd, SOURCE_FEATURES)
    ids = sorted(feats)
    if cfg.embedding == "external":
        ext = {r["source_id"]: [float(r[k]) for k in ("e1", "e2", "e3")]
               for r in read_rows(cfg.resolve(cfg.external_path))}
        labels = stratified_two_fold(None, cfg.seeds["folds"], "external", [ext[i] for i in ids])
    else:
        F = np.array([[feats[i][k] for k in FEATURE_NAMES] for i in ids])
        labels = stratified_two_fold(F, cfg.seeds["folds"], cfg.embedding)
    return dict(zip(ids, (int(x) for x in labels)))


def read_folds(wd: Workdir) -> dict[str, int]:
    wd.require(FOLDS, stage="train-meta")
    return {r["source_id"]: int(r["fold"]) for r in read_rows(wd.root / FOLDS)}


def _train(cfg: Config, data, objective: str, trace_key: str, traces: dict) -> Forest:
    n, C = data.X.shape
    seed = cfg.seeds["forest"]
    if n >= 50 and cfg.warmup + cfg.refine > 0:
        res = tune(data.X, data.y, data.columns, objective, seed, data.always_split,
                   cfg.tune_trees, cfg.warmup, cfg.refine)
        mtry, mns = res.mtry, res.min_node_size
        traces[trace_key] = res.trace
    else:
        mtry, mns = max(1, int(np.ceil(np.sqrt(C)))), 5
        traces[trace_key] = "untuned: fewer than 50 rows"
    return fit_forest(data.X, data.y, data.columns, mtry, mns, seed, data.always_split,
                      objective, cfg.n_trees)


def stage_train_meta(wd: Workdir) -> dict:
    cfg = wd.cfg
    _, segments = read_segments(wd)
    features = read_features(wd)
    ranks = read_ranks(wd)
    targets = read_targets(wd)
    folds = compute_folds(wd)
    write_rows(wd.path(FOLDS), ("source_id", "fold"), sorted(folds.items()))
    traces: dict = {}
    outputs = [FOLDS]
    summary = {}
    for fold in (1, 2):
        train = [s for s in segments if folds[s.source_id] == fold]
        a1 = assemble_a1(train, features, ranks, cfg.models)
        f1 = _train(cfg, a1, "rmsle", f"a1_fold{fold}", traces)
        wd.path(forest_name("a1", fold)).write_text(f1.to_json())
        outputs.append(forest_name("a1", fold))
        summary[f"a1_fold{fold}"] = {"rows": len(a1), "oob_rmsle": f1.oob_score}
        for mode in ("simple", "weighted"):
            a2 = assemble_a2(train, features, {k: v[mode] for k, v in targets.items()})
            f2 = _train(cfg, a2, "rmse", f"a2_{mode}_fold{fold}", traces)
            wd.path(forest_name(f"a2_{mode}", fold)).write_text(f2.to_json())
            outputs.append(forest_name(f"a2_{mode}", fold))
            summary[f"a2_{mode}_fold{fold}"] = {"rows": len(a2), "oob_rmse": f2.oob_score}
    wd.path(TUNING).write_text(json.dumps(traces, indent=1, sort_keys=True))
    outputs.append(TUNING)
    wd.record("train-meta", outputs, inputs=[FEATURES, SOURCE_FEATURES, RANKS, TARGETS])
    return summary


def load_forest(wd: Workdir, kind: str, fold: int) -> Forest:
    name = forest_name(kind, fold)
    wd.require(name, stage="train-meta")
    return Forest.from_json((wd.root / name).read_text())


# ---------------------------------------------------------------- benchmark

def _safe_comb(seg: Segment) -> np.ndarray:
    try:
        with np.errstate(all="ignore"):
            fc = comb_forecast(seg.train.values, seg.horizon, PERIODS[seg.frequency])
        if np.all(np.isfinite(fc)):
            return fc
    except (ValueError, np.linalg.LinAlgError, FloatingPointError):
        pass
    return naive(seg.train.values, seg.horizon)


def benchmark_fold(
    cfg: Config, test: list[Segment], features, forecasts, a1: Forest,
    a2: dict[str, Forest], test_fold: int,
):
    """Error rows and recommendation rows for one test fold."""
    err_rows, rec_rows = [], []
    P = len(cfg.models)
    for seg in test:
        feats = features[seg.segment_id]
        ranked = [m for m, _ in rank_pool(a1, feats, seg.horizon, seg.frequency, cfg.models)]
        row = a2_row(feats, seg.horizon, seg.frequency)
        fc = forecasts[seg.segment_id]
        preds = {
            "Theta": fc["Theta"] if "Theta" in fc
            else fit_and_forecast("Theta", seg.train, seg.horizon).point_forecast,
            "Comb": _safe_comb(seg),
        }
        for mode, label in (("simple", "Simple"), ("weighted", "Weighted")):
            k = clamp_size(float(a2[mode].predict(row)[0]), P)
            preds[label] = combine(ranked, k, mode, fc)
            rec_rows.append((seg.segment_id, test_fold, mode, k, " ".join(ranked)))
        for method in METHODS:
            e = compute_errors(seg.test, preds[method], seg.train)
            err_rows.append(
                (seg.segment_id, seg.source_id, test_fold, seg.frequency, seg.horizon, method)
                + tuple(fmt(e[k]) for k in METRICS)
            )
    return err_rows, rec_rows


def stage_benchmark(wd: Workdir) -> dict:
    cfg = wd.cfg
    _, segments = read_segments(wd)
    features = read_features(wd)
    forecasts = read_forecasts(wd)
    folds = read_folds(wd)
    err_rows, rec_rows = [], []
    for train_fold in (1, 2):
        test_fold = 3 - train_fold
        test = [s for s in segments if s.split_kind == "full" and folds[s.source_id] == test_fold]
        a1 = load_forest(wd, "a1", train_fold)
        a2 = {m: load_forest(wd, f"a2_{m}", train_fold) for m in ("simple", "weighted")}
        e, r = benchmark_fold(cfg, test, features, forecasts, a1, a2, test_fold)
        err_rows += e
        rec_rows += r
    err_rows.sort(key=lambda r: (r[0], METHODS.index(r[5])))
    rec_rows.sort(key=lambda r: (r[0], r[2]))
    write_rows(
        wd.path(TEST_ERRORS),
        ("segment_id", "source_id", "test_fold", "frequency", "horizon", "method") + METRICS,
        err_rows,
    )
    write_rows(wd.path(RECOMMENDATIONS), ("segment_id", "test_fold", "mode", "k", "ranking"), rec_rows)
    wd.record("benchmark", [TEST_ERRORS, RECOMMENDATIONS], inputs=[FOLDS, FORECASTS, FEATURES])
    return {"test_segments": len(err_rows) // len(METHODS)}


# ---------------------------------------------------------------- report

def stage_report(wd: Workdir) -> dict:
    wd.require(TEST_ERRORS, stage="benchmark")
    rows = read_rows(wd.root / TEST_ERRORS)
    tables = report_mod.build_tables(rows, METHODS, wd.cfg.frequencies)
    outputs = []
    for metric, table in tables.items():
        name = f"tables_{metric}.csv"
        report_mod.write_table_csv(wd.path(name), table, METHODS)
        outputs.append(name)
    wd.path("report.md").write_text(report_mod.markdown(tables, METHODS))
    outputs.append("report.md")
    wd.record("report", outputs, inputs=[TEST_ERRORS])
    grand = {m: tables["smape"][-1].cells[m][0] for m in METHODS}
    return {"smape_overall": grand}


STAGE_FUNCS = {
    "ingest": lambda wd, jobs: stage_ingest(wd),
    "expand": lambda wd, jobs: stage_expand(wd),
    "features": stage_features,
    "evaluate-pool": stage_evaluate_pool,
    "targets": lambda wd, jobs: stage_targets(wd),
    "train-meta": lambda wd, jobs: stage_train_meta(wd),
    "benchmark": lambda wd, jobs: stage_benchmark(wd),
    "report": lambda wd, jobs: stage_report(wd),
}


def run_stage(wd: Workdir, stage: str, jobs: int = 1, force: bool = False):
    """Run one stage; returns None when it is already complete and ``force`` is off."""
    if not force and wd.is_complete(stage):
        return None
    # downstream records are stale once a stage reruns
    wd.invalidate_from(STAGES[STAGES.index(stage) + 1 :])
    return STAGE_FUNCS[stage](wd, jobs)


def run_experiment(cfg: Config, workdir: str | Path, jobs: int = 1, force: bool = False) -> dict:
    wd = Workdir(workdir, cfg)
    summary = {}
    for stage in STAGES:
        summary[stage] = run_stage(wd, stage, jobs, force)
    return summary
