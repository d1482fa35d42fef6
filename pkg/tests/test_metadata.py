import numpy as np
import pytest

from fcassist.features import FEATURE_NAMES, META_NAMES
from fcassist.metadata import (
    A2_ALWAYS_SPLIT, CAPABILITY_NAMES, AssemblyError, a1_always_split, a1_columns, a1_rows,
    a2_columns, assemble_a1, assemble_a2,
)
from fcassist.metrics import RankRow
from fcassist.models import MODEL_IDS, spec
from fcassist.series import TimeSeries, expand_augmented

MODELS = ("Naive", "SNaive", "Theta", "STL-ETS")


def corpus():
    g = np.random.default_rng(0)
    series = [TimeSeries(f"s{i}", "monthly", 50 + g.normal(size=int(g.integers(40, 90)))) for i in range(4)]
    segs = expand_augmented(series, (6, 12))
    feats = {s.segment_id: dict(zip(FEATURE_NAMES, g.normal(size=len(FEATURE_NAMES)))) for s in segs}
    ranks = {}
    for s in segs:
        order = g.permutation(len(MODELS))
        ranks[s.segment_id] = [RankRow(m, {}, 0.0, float(r + 1), int(r + 1)) for m, r in zip(MODELS, order)]
    return segs, feats, ranks


class TestA1:
    def test_shape_and_targets(self):
        segs, feats, ranks = corpus()
        d = assemble_a1(segs, feats, ranks, MODELS)
        P = len(MODELS)
        assert len(d) == len(segs) * P and d.X.shape == (len(segs) * P, len(a1_columns(MODELS)))
        assert set(d.y) <= set(range(1, P + 1))
        assert d.keys[:P] == [(segs[0].segment_id, m) for m in MODELS]
        for (sid, m), target in zip(d.keys, d.y):
            want = next(r.final_rank for r in ranks[sid] if r.model_id == m)
            assert target == want

    def test_flags(self):
        segs, feats, ranks = corpus()
        d = assemble_a1(segs, feats, ranks, MODELS)
        cols = list(d.columns)
        onehot = d.X[:, [cols.index(f"model={m}") for m in MODELS]]
        assert np.all(onehot.sum(axis=1) == 1)
        freq = d.X[:, [cols.index(k) for k in ("is_daily", "is_weekly", "is_monthly")]]
        assert np.all(freq.sum(axis=1) == 1) and np.all(freq[:, 2] == 1)
        caps = d.X[:, [cols.index(c) for c in CAPABILITY_NAMES]]
        for (_, m), row in zip(d.keys, caps):
            s = spec(m)
            assert row.tolist() == [s.seasonal, s.complex, s.decomposition]
        horizons = {int(h) for h in d.X[:, cols.index("horizon")]}
        assert horizons == {s.horizon for s in segs}

    def test_always_split(self):
        assert set(a1_always_split()) == set(META_NAMES) | {f"model={m}" for m in MODEL_IDS} | set(CAPABILITY_NAMES)
        assert set(A2_ALWAYS_SPLIT) == {"horizon", "is_daily", "is_weekly", "is_monthly"}
        assert not set(a1_always_split()) & set(FEATURE_NAMES)

    def test_missing_rank_row(self):
        segs, feats, ranks = corpus()
        sid = segs[2].segment_id
        ranks[sid] = ranks[sid][:-1]
        with pytest.raises(AssemblyError, match="STL-ETS|" + ranks[sid][0].model_id):
            assemble_a1(segs, feats, ranks, MODELS)
        del ranks[sid]
        with pytest.raises(AssemblyError, match=sid):
            assemble_a1(segs, feats, ranks, MODELS)

    def test_missing_features(self):
        segs, feats, ranks = corpus()
        del feats[segs[0].segment_id]
        with pytest.raises(AssemblyError, match="features"):
            assemble_a1(segs, feats, ranks, MODELS)

    def test_rows_match_serving_rows(self):
        segs, feats, ranks = corpus()
        d = assemble_a1(segs[:1], feats, ranks, MODELS)
        s = segs[0]
        np.testing.assert_array_equal(d.X, a1_rows(feats[s.segment_id], s.horizon, s.frequency, MODELS))


class TestA2:
    def test_rows(self):
        segs, feats, _ = corpus()
        simple = {s.segment_id: 1 + i % 4 for i, s in enumerate(segs)}
        weighted = {s.segment_id: 1 + i % 3 for i, s in enumerate(segs)}
        a = assemble_a2(segs, feats, simple)
        b = assemble_a2(segs, feats, weighted)
        assert len(a) == len(segs) and a.columns == a2_columns()
        assert not any(c.startswith("model=") for c in a.columns)
        np.testing.assert_array_equal(a.X, b.X)
        assert a.y.tolist() != b.y.tolist()
        assert a.always_split == A2_ALWAYS_SPLIT

    def test_missing_target(self):
        segs, feats, _ = corpus()
        with pytest.raises(AssemblyError, match="ensemble-size"):
            assemble_a2(segs, feats, {})

    def test_identical_forecasts_give_k1(self):
        from fcassist.metrics import optimal_ensemble_size

        g = np.random.default_rng(2)
        for _ in range(20):
            train = TimeSeries("x", "monthly", g.normal(size=40))
            F = np.tile(g.normal(size=6), (5, 1))
            for mode in ("simple", "weighted"):
                assert optimal_ensemble_size(F, g.normal(size=6), train, mode) == 1

    def test_empty(self):
        assert assemble_a2([], {}, {}).X.shape == (0, len(a2_columns()))
