import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fcassist.report import REPORT_METRICS, build_tables, interval, markdown, write_table_csv

METHODS = ("Theta", "Comb", "Simple", "Weighted")


class TestInterval:
    def test_constant(self):
        iv = interval([3.0] * 7)
        assert (iv.mean, iv.halfwidth, iv.n, iv.flagged) == (3.0, 0.0, 7, False)

    def test_two_values(self):
        mean, half = interval([0.0, 2.0])
        assert mean == 1.0
        assert half == pytest.approx(1.96 / math.sqrt(2), abs=1e-12)
        assert round(half, 4) == 1.3859

    def test_small_n_flagged(self):
        iv = interval([4.0])
        assert (iv.mean, iv.halfwidth, iv.flagged) == (4.0, 0.0, True)
        assert interval([]).flagged and math.isnan(interval([]).mean)

    def test_nan_dropped(self):
        iv = interval([1.0, np.nan, 3.0])
        assert iv.n == 2 and iv.mean == 2.0

    @given(st.integers(0, 10_000), st.integers(2, 30), st.integers(2, 9))
    def test_sqrt_n_scaling(self, seed, n, r):
        v = np.random.default_rng(seed).normal(size=n)
        one = interval(v).halfwidth
        rep = interval(np.tile(v, r)).halfwidth
        assert rep == pytest.approx(one / math.sqrt(r), rel=1e-10)


def error_rows(seed=0):
    g = np.random.default_rng(seed)
    rows = []
    for f, hs in (("weekly", (4, 13)), ("monthly", (6, 12, 24))):
        for h in hs:
            for i in range(int(g.integers(1, 9))):
                for m in METHODS:
                    vals = {k: repr(float(g.gamma(2.0, 5.0))) for k in REPORT_METRICS}
                    if g.random() < 0.05:
                        vals["mase"] = "nan"
                    rows.append({"segment_id": f"{f}{h}-{i}", "frequency": f, "horizon": str(h),
                                 "method": m, **vals})
    return rows


class TestTables:
    def test_layout(self):
        tables = build_tables(error_rows(), METHODS, ("weekly", "monthly"))
        assert set(tables) == set(REPORT_METRICS)
        labels = [(r.frequency, r.horizon) for r in tables["smape"]]
        assert labels == [("weekly", "4"), ("weekly", "13"), ("weekly", "sum"),
                          ("monthly", "6"), ("monthly", "12"), ("monthly", "24"), ("monthly", "sum"),
                          ("all", "sum")]

    @pytest.mark.parametrize("seed", range(5))
    def test_sum_rows_recomputed(self, seed):
        rows = error_rows(seed)
        tables = build_tables(rows, METHODS, ("weekly", "monthly"))
        for metric in REPORT_METRICS:
            for tr in tables[metric]:
                for m in METHODS:
                    picked = [float(r[metric]) for r in rows if r["method"] == m
                              and tr.frequency in (r["frequency"], "all")
                              and tr.horizon in (r["horizon"], "sum")]
                    picked = [v for v in picked if not math.isnan(v)]
                    mean = sum(picked) / len(picked)
                    assert tr.cells[m].mean == pytest.approx(mean, abs=1e-9)
                    assert tr.cells[m].n == len(picked)
                    if len(picked) > 1:
                        sd = math.sqrt(sum((v - mean) ** 2 for v in picked) / len(picked))
                        assert tr.cells[m].halfwidth == pytest.approx(1.96 * sd / math.sqrt(len(picked)), abs=1e-9)

    def test_pooled_not_mean_of_means(self):
        rows = []
        for h, vals in (("6", [0.0]), ("12", [10.0, 10.0, 10.0])):
            for i, v in enumerate(vals):
                rows.append({"frequency": "monthly", "horizon": h, "method": "Theta",
                             "smape": str(v), "maape": "0", "mase": "0"})
        table = build_tables(rows, ("Theta",), ("monthly",))["smape"]
        assert table[-1].cells["Theta"].mean == 7.5

    def test_csv_and_markdown(self, tmp_path):
        tables = build_tables(error_rows(), METHODS, ("weekly", "monthly"))
        p = tmp_path / "t.csv"
        write_table_csv(p, tables["smape"], METHODS)
        with open(p) as fh:
            got = list(csv.DictReader(fh))
        assert len(got) == len(tables["smape"])
        assert float(got[-1]["Weighted"]) == tables["smape"][-1].cells["Weighted"].mean
        md = markdown(tables, METHODS)
        assert "## SMAPE" in md and "Σ" in md
        widths = {len(line) for line in md.splitlines() if line.startswith("|")}
        assert len(widths) <= 3
