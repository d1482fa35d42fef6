import json
import shutil

import numpy as np
import pytest

from fcassist import experiment as ex
from fcassist.config import load_config, parse_config
from fcassist.pipeline import StageError, Workdir, parallel_map, read_rows, sha256_file

REPORTS = ("tables_smape.csv", "tables_maape.csv", "tables_mase.csv")


def manifest(root):
    return json.loads((root / "manifest.json").read_text())


def outputs(root):
    return {s: rec["outputs"] for s, rec in manifest(root)["stages"].items()}


@pytest.fixture
def run_copy(tiny_run, tmp_path):
    dst = tmp_path / "run"
    shutil.copytree(tiny_run[0], dst)
    return dst


class TestManifest:
    def test_all_stages_recorded(self, tiny_run, tiny_config):
        root, summary = tiny_run
        assert list(summary) == list(ex.STAGES)
        m = manifest(root)
        assert set(m["stages"]) == set(ex.STAGES)
        assert m["config_hash"] == load_config(tiny_config).digest()
        for rec in m["stages"].values():
            for name, digest in rec["outputs"].items():
                assert sha256_file(root / name) == digest

    def test_rerun_is_noop(self, run_copy, tiny_config):
        before = outputs(run_copy)
        mtimes = {p: p.stat().st_mtime_ns for p in run_copy.rglob("*.csv")}
        summary = ex.run_experiment(load_config(tiny_config), run_copy)
        assert all(v is None for v in summary.values())
        assert outputs(run_copy) == before
        assert {p: p.stat().st_mtime_ns for p in run_copy.rglob("*.csv")} == mtimes

    def test_forced_stage_is_idempotent(self, run_copy, tiny_config):
        before = outputs(run_copy)
        wd = Workdir(run_copy, load_config(tiny_config))
        for stage in ("features", "targets"):
            assert ex.run_stage(wd, stage, force=True) is not None
            assert outputs(run_copy)[stage] == before[stage]

    def test_jobs_do_not_change_results(self, run_copy, tiny_config):
        before = outputs(run_copy)["features"]
        wd = Workdir(run_copy, load_config(tiny_config))
        ex.run_stage(wd, "features", jobs=2, force=True)
        assert outputs(run_copy)["features"] == before

    def test_rerun_invalidates_downstream(self, run_copy, tiny_config):
        wd = Workdir(run_copy, load_config(tiny_config))
        ex.run_stage(wd, "targets", force=True)
        done = set(manifest(run_copy)["stages"])
        assert "targets" in done and not done & {"train-meta", "benchmark", "report"}

    def test_tampered_output_reruns(self, run_copy, tiny_config):
        (run_copy / "tables_smape.csv").write_text("x\n")
        wd = Workdir(run_copy, load_config(tiny_config))
        assert not wd.is_complete("report")
        assert ex.run_stage(wd, "report") is not None

    def test_config_change_resets(self, run_copy, tiny_config):
        text = tiny_config.read_text().replace("forest = 9", "forest = 10")
        wd = Workdir(run_copy, parse_config(text))
        assert wd.manifest["stages"] == {}

    def test_missing_upstream_names_stage(self, tmp_path, tiny_config):
        wd = Workdir(tmp_path / "empty", load_config(tiny_config))
        with pytest.raises(StageError, match="ingest"):
            ex.run_stage(wd, "expand")
        ex.run_stage(wd, "ingest")
        with pytest.raises(StageError, match="expand"):
            ex.run_stage(wd, "features")

    def test_parallel_map_order(self):
        assert parallel_map(abs, [-3, 1, -2, 5, -7], jobs=2) == [3, 1, 2, 5, 7]


class TestProtocol:
    def test_no_leakage(self, tiny_run, tiny_config):
        root, summary = tiny_run
        wd = Workdir(root, load_config(tiny_config))
        _, segments = ex.read_segments(wd)
        folds = ex.read_folds(wd)
        errors = read_rows(root / ex.TEST_ERRORS)
        assert errors
        for test_fold in (1, 2):
            train_src = {s.source_id for s in segments if folds[s.source_id] == 3 - test_fold}
            test_rows = [r for r in errors if int(r["test_fold"]) == test_fold]
            test_src = {r["source_id"] for r in test_rows}
            assert test_src and not train_src & test_src
            assert all(r["segment_id"].split("/")[1] == "full" for r in test_rows)
            # every training segment of this direction, halves included, comes from the train fold
            n_train = sum(folds[s.source_id] == 3 - test_fold for s in segments)
            trained = summary["train-meta"]
            assert trained[f"a1_fold{3 - test_fold}"]["rows"] == n_train * len(wd.cfg.models)
            assert trained[f"a2_simple_fold{3 - test_fold}"]["rows"] == n_train

    def test_fold_sizes(self, tiny_run):
        labels = [int(r["fold"]) for r in read_rows(tiny_run[0] / ex.FOLDS)]
        assert abs(labels.count(1) - labels.count(2)) <= 1

    def test_every_initial_segment_tested_once(self, tiny_run):
        root, summary = tiny_run
        ids = [r["segment_id"] for r in read_rows(root / ex.TEST_ERRORS) if r["method"] == "Theta"]
        assert len(ids) == len(set(ids)) == summary["expand"]["initial"][("monthly", 6)]

    def test_fold_swap_symmetry(self, run_copy, tiny_config, monkeypatch):
        before = {n: (run_copy / n).read_bytes() for n in REPORTS}
        labels = [int(r["fold"]) for r in read_rows(run_copy / ex.FOLDS)]
        original = ex.compute_folds
        monkeypatch.setattr(ex, "compute_folds", lambda wd: {k: 3 - v for k, v in original(wd).items()})
        wd = Workdir(run_copy, load_config(tiny_config))
        ex.run_stage(wd, "train-meta", force=True)
        ex.run_stage(wd, "benchmark")
        ex.run_stage(wd, "report")
        assert [int(r["fold"]) for r in read_rows(run_copy / ex.FOLDS)] == [3 - x for x in labels]
        for n in REPORTS:
            assert (run_copy / n).read_bytes() == before[n]

    def test_report_sums_match_errors(self, tiny_run):
        root, _ = tiny_run
        errors = read_rows(root / ex.TEST_ERRORS)
        for metric in ("smape", "maape", "mase"):
            table = read_rows(root / f"tables_{metric}.csv")
            grand = table[-1]
            assert (grand["frequency"], grand["horizon"]) == ("all", "sum")
            for m in ex.METHODS:
                vals = np.array([float(r[metric]) for r in errors if r["method"] == m])
                vals = vals[np.isfinite(vals)]
                assert float(grand[m]) == pytest.approx(vals.mean(), abs=1e-9)


LINES_CONFIG = """
[data]
source = csv
path = lines.csv
n_series = 0

[expansion]
horizons = 6

[pool]
models = Naive, SNaive, LinTrend

[forest]
n_trees = 32
warmup = 0
refine = 0

[seeds]
corpus = 1
sample = 1
folds = 1
forest = 1
"""


def test_exact_member_corpus(tmp_path):
    # every series is a straight line, so LinTrend is exact on every segment
    g = np.random.default_rng(0)
    with open(tmp_path / "lines.csv", "w") as fh:
        for i in range(16):
            a, b = g.uniform(10, 100), g.uniform(-2, 2)
            vals = a + b * np.arange(int(g.integers(40, 80)))
            fh.write(",".join([f"L{i}", "monthly"] + [repr(float(v)) for v in vals]) + "\n")
    (tmp_path / "lines.ini").write_text(LINES_CONFIG)
    root = tmp_path / "work"
    ex.run_experiment(load_config(tmp_path / "lines.ini"), root)
    rows = read_rows(root / ex.TEST_ERRORS)
    lin = {r["segment_id"]: r for r in rows if r["method"] == "Theta"}
    assert len(lin) == 16
    recs = read_rows(root / ex.RECOMMENDATIONS)
    assert all(r["ranking"].split()[0] == "LinTrend" and r["k"] == "1" for r in recs)
    for r in rows:
        if r["method"] in ("Simple", "Weighted"):
            assert float(r["smape"]) <= 1e-9 and float(r["mase"]) <= 1e-9


def test_m4_layout_loader(tmp_path):
    # M4 files quote ids and values and carry a V1,V2,... header
    def write(name, rows):
        width = max(len(r) for r in rows)
        header = ",".join(f'"V{i}"' for i in range(1, width + 1))
        body = "\n".join(",".join(f'"{c}"' for c in r) + "," * (width - len(r)) for r in rows)
        (tmp_path / name).write_text(header + "\n" + body + "\n")

    write("Monthly-train.csv", [["M1", "1", "2", "3"], ["M19700", "5", "6"], ["M2", "9", "8"]])
    write("Monthly-test.csv", [["M1", "4", "5"], ["M19700", "7"], ["M2", "7"]])
    cfg = parse_config(f"[data]\nsource = m4\npath = {tmp_path}\nn_series = 0\n"
                       "[seeds]\ncorpus = 1\nsample = 1\nfolds = 1\nforest = 1\n")
    series = ex.load_corpus(cfg)
    assert [s.id for s in series] == ["M1", "M2"]
    assert series[0].values.tolist() == [1, 2, 3, 4, 5] and series[1].values.tolist() == [9, 8, 7]
    cfg.n_series = 1
    assert len(ex.load_corpus(cfg)) == 1
