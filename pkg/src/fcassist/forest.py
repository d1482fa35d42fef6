"""Random-forest regression with always-split columns, OOB objectives and tuning."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

N_TREES = 256
WARMUP = 21
REFINE = 9
OBJECTIVES = ("rmse", "rmsle")
_GAIN_RTOL = 1e-12


class SchemaError(ValueError):
    """Prediction input does not match the forest's column catalog."""


@njit(cache=True)
def _draw_candidates(pool, mtry, always, cand):
    # partial Fisher-Yates over ``pool``; result sorted so ties prefer the lowest column
    work = pool.copy()
    k = min(mtry, work.size)
    for i in range(k):
        j = i + np.random.randint(work.size - i)
        work[i], work[j] = work[j], work[i]
    n = 0
    for i in range(k):
        cand[n] = work[i]
        n += 1
    for a in always:
        cand[n] = a
        n += 1
    out = np.sort(cand[:n])
    return out


MAX_BINS = 256


def bin_columns(X: np.ndarray, max_bins: int = MAX_BINS):
    """Per-column cut points; exact (every distinct value) when there are few enough.

    Returns the (C, n) bin matrix, the padded cut table, cut counts and exact flags.
    Bin ``b`` holds values in (cut[b-1], cut[b]].
    """
    n, C = X.shape
    cuts = np.zeros((C, max_bins))
    n_cuts = np.zeros(C, np.int64)
    exact = np.zeros(C, np.bool_)
    Xb = np.empty((C, n), np.uint8)
    for j in range(C):
        col = X[:, j]
        u = np.unique(col)
        if u.size <= max_bins:
            cj, exact[j] = u, True
        else:
            q = np.arange(1, max_bins + 1) / max_bins
            cj = np.unique(np.quantile(col, q, method="inverted_cdf"))
        cuts[j, : cj.size] = cj
        n_cuts[j] = cj.size
        Xb[j] = np.minimum(np.searchsorted(cj, col, side="left"), cj.size - 1)
    return Xb, cuts, n_cuts, exact


@njit(cache=True)
def _grow(Xb, cuts, n_cuts, exact, y, idx, mtry, min_node, pool, always, seed, log_nodes):
    np.random.seed(seed)
    n = idx.size
    C = Xb.shape[0]
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap)
    counts = np.zeros(cap, np.int64)
    cand_log = np.zeros((cap if log_nodes else 0, C), np.uint8)
    cand = np.empty(pool.size + always.size, np.int64)
    hsum = np.zeros(cuts.shape[1])
    hcnt = np.zeros(cuts.shape[1], np.int64)
    tmp = np.empty(n, np.int64)
    sb = np.empty(n, np.uint8)
    sy = np.empty(n)
    gbin = np.empty(cuts.shape[1], np.int64)
    gsum = np.empty(cuts.shape[1])
    gcnt = np.empty(cuts.shape[1], np.int64)

    work = idx.copy()
    stack_node = np.empty(cap, np.int64)
    stack_lo = np.empty(cap, np.int64)
    stack_hi = np.empty(cap, np.int64)
    stack_node[0], stack_lo[0], stack_hi[0] = 0, 0, n
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        node, lo, hi = stack_node[sp], stack_lo[sp], stack_hi[sp]
        m = hi - lo
        s = 0.0
        ss = 0.0
        for i in range(lo, hi):
            v = y[work[i]]
            s += v
            ss += v * v
        mean = s / m
        value[node] = mean
        counts[node] = m
        var = ss / m - mean * mean
        if m < 2 * min_node or var <= 1e-14 * max(1.0, mean * mean):
            continue
        cols = _draw_candidates(pool, mtry, always, cand)
        if log_nodes:
            for c in cols:
                cand_log[node, c] = 1
        best_gain = s * s / m
        best_col = -1
        best_bin = -1
        best_thr = 0.0
        for c in cols:
            K = n_cuts[c]
            if K < 2:
                continue
            row_bins = Xb[c]
            # small nodes: walk the sorted bins of their rows instead of all K bins
            small = 4 * m < K
            if small:
                for i in range(m):
                    r = work[lo + i]
                    sb[i] = row_bins[r]
                    sy[i] = y[r]
                order = np.argsort(sb[:m])
                n_groups = 0
                i = 0
                while i < m:
                    b = sb[order[i]]
                    gs = 0.0
                    gc = 0
                    while i < m and sb[order[i]] == b:
                        gs += sy[order[i]]
                        gc += 1
                        i += 1
                    gbin[n_groups] = b
                    gsum[n_groups] = gs
                    gcnt[n_groups] = gc
                    n_groups += 1
            else:
                for i in range(lo, hi):
                    r = work[i]
                    b = row_bins[r]
                    hsum[b] += y[r]
                    hcnt[b] += 1
                n_groups = 0
                for b in range(K):
                    if hcnt[b] > 0:
                        gbin[n_groups] = b
                        gsum[n_groups] = hsum[b]
                        gcnt[n_groups] = hcnt[b]
                        n_groups += 1
                        hsum[b] = 0.0
                        hcnt[b] = 0
            sl = 0.0
            nl = 0
            for g in range(n_groups - 1):
                sl += gsum[g]
                nl += gcnt[g]
                if nl < min_node:
                    continue
                if m - nl < min_node:
                    break
                sr = s - sl
                gain = sl * sl / nl + sr * sr / (m - nl)
                if gain > best_gain + _GAIN_RTOL * abs(best_gain):
                    best_gain = gain
                    best_col = c
                    best_bin = gbin[g]
                    a = cuts[c, gbin[g]]
                    if exact[c]:
                        nxt = cuts[c, gbin[g + 1]]
                        t = a + (nxt - a) * 0.5
                        best_thr = t if t < nxt else a
                    else:
                        best_thr = a
        if best_col < 0:
            continue
        row_bins = Xb[best_col]
        k = 0
        for i in range(lo, hi):
            if row_bins[work[i]] <= best_bin:
                tmp[k] = work[i]
                k += 1
        nl = k
        for i in range(lo, hi):
            if row_bins[work[i]] > best_bin:
                tmp[k] = work[i]
                k += 1
        for i in range(m):
            work[lo + i] = tmp[i]
        feature[node] = best_col
        threshold[node] = best_thr
        li, ri = n_nodes, n_nodes + 1
        n_nodes += 2
        left[node], right[node] = li, ri
        stack_node[sp], stack_lo[sp], stack_hi[sp] = ri, lo + nl, hi
        sp += 1
        stack_node[sp], stack_lo[sp], stack_hi[sp] = li, lo, lo + nl
        sp += 1
    return (
        feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes],
        value[:n_nodes], counts[:n_nodes], cand_log[: n_nodes if log_nodes else 0],
    )


@njit(cache=True)
def _predict_tree(X, feature, threshold, left, right, value):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _predict_tree(X, self.feature, self.threshold, self.left, self.right, self.value)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": [float(v) for v in self.value],
            "count": self.count.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.asarray(d["feature"], np.int64), np.asarray(d["threshold"], float),
            np.asarray(d["left"], np.int64), np.asarray(d["right"], np.int64),
            np.asarray(d["value"], float), np.asarray(d["count"], np.int64),
        )


def _column_split(n_cols: int, always_split: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    always = np.asarray(sorted(set(int(a) for a in always_split)), np.int64)
    taken = set(always.tolist())
    pool = np.asarray([c for c in range(n_cols) if c not in taken], np.int64)
    return pool, always


def _grow_binned(binned, y, rows, mtry, min_node_size, pool, always, seed, log_candidates):
    Xb, cuts, n_cuts, exact = binned
    f, t, lft, rgt, v, cnt, log = _grow(
        Xb, cuts, n_cuts, exact, y, rows, int(mtry), int(min_node_size),
        pool, always, int(seed), log_candidates,
    )
    return Tree(f.copy(), t.copy(), lft.copy(), rgt.copy(), v.copy(), cnt.copy()), log


def fit_tree(
    X, y, mtry: int, min_node_size: int, always_split: Sequence[int] = (),
    seed: int = 0, rows=None, log_candidates: bool = False,
):
    """Grow one regression tree on ``rows`` (bootstrap indices, duplicates allowed).

    Candidate columns at each node are ``mtry`` draws without replacement from
    the other columns plus every ``always_split`` column. With
    ``log_candidates`` the per-node candidate mask is returned as well.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if X.shape[0] == 0 or X.shape[0] != y.size:
        raise ValueError("fit_tree needs matching, non-empty X and y")
    if mtry < 1 or min_node_size < 1:
        raise ValueError("mtry and min_node_size must be positive")
    if not np.all(np.isfinite(X)):
        raise ValueError("fit_tree needs imputed (finite) X")
    pool, always = _column_split(X.shape[1], always_split)
    idx = np.arange(y.size, dtype=np.int64) if rows is None else np.asarray(rows, np.int64)
    tree, log = _grow_binned(
        bin_columns(X), y, idx, mtry, min_node_size, pool, always, seed, log_candidates
    )
    return (tree, log.astype(bool)) if log_candidates else tree


def impute_medians(X: np.ndarray) -> np.ndarray:
    med = np.full(X.shape[1], 0.0)
    for j in range(X.shape[1]):
        col = X[:, j]
        col = col[np.isfinite(col)]
        if col.size:
            med[j] = float(np.median(col))
    return med


def apply_imputation(X: np.ndarray, medians: np.ndarray) -> np.ndarray:
    X = np.array(X, dtype=float, copy=True)
    bad = ~np.isfinite(X)
    if bad.any():
        X[bad] = np.broadcast_to(medians, X.shape)[bad]
    return X


def tree_streams(seed: int, n_trees: int) -> list[np.random.Generator]:
    return [np.random.default_rng(np.random.SeedSequence([int(seed), t])) for t in range(n_trees)]


def score(pred: np.ndarray, y: np.ndarray, objective: str) -> float:
    if objective == "rmse":
        d = pred - y
    elif objective == "rmsle":
        d = np.log1p(pred) - np.log1p(y)
    else:
        raise ValueError(f"unknown objective {objective!r}")
    return float(np.sqrt(np.mean(d * d))) if d.size else math.nan


@dataclass
class Forest:
    columns: list[str]
    medians: np.ndarray
    always_split: list[str]
    mtry: int
    min_node_size: int
    seed: int
    objective: str
    trees: list[Tree] = field(default_factory=list)
    oob_prediction: np.ndarray | None = None
    oob_score: float = math.nan
    oob_excluded: int = 0
    bootstrap: bool = True

    def _matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.columns):
            raise SchemaError(f"expected {len(self.columns)} columns, got {X.shape[1]}")
        return apply_imputation(X, self.medians)

    def predict(self, X) -> np.ndarray:
        Xi = self._matrix(X)
        total = np.zeros(Xi.shape[0])
        for t in self.trees:
            total += t.predict(Xi)
        return total / len(self.trees)

    def predict_row(self, row: dict[str, float]) -> float:
        if set(row) != set(self.columns):
            missing = sorted(set(self.columns) - set(row))[:3]
            extra = sorted(set(row) - set(self.columns))[:3]
            raise SchemaError(f"column mismatch: missing {missing}, unexpected {extra}")
        x = np.array([row[c] for c in self.columns], dtype=float)
        return float(self.predict(x)[0])

    def to_json(self) -> str:
        doc = {
            "format": "fcassist-forest",
            "version": 1,
            "objective": self.objective,
            "mtry": self.mtry,
            "min_node_size": self.min_node_size,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
            "columns": self.columns,
            "always_split": self.always_split,
            "medians": [float(m) for m in self.medians],
            "oob_score": None if math.isnan(self.oob_score) else self.oob_score,
            "oob_excluded": self.oob_excluded,
            "trees": [t.to_dict() for t in self.trees],
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Forest":
        d = json.loads(text)
        if d.get("format") != "fcassist-forest":
            raise SchemaError("not a forest document")
        return cls(
            columns=list(d["columns"]),
            medians=np.asarray(d["medians"], float),
            always_split=list(d["always_split"]),
            mtry=int(d["mtry"]),
            min_node_size=int(d["min_node_size"]),
            seed=int(d["seed"]),
            objective=d["objective"],
            trees=[Tree.from_dict(t) for t in d["trees"]],
            oob_score=math.nan if d["oob_score"] is None else float(d["oob_score"]),
            oob_excluded=int(d["oob_excluded"]),
            bootstrap=bool(d["bootstrap"]),
        )


def fit_forest(
    X, y, columns: Sequence[str], mtry: int, min_node_size: int, seed: int,
    always_split: Sequence[str] = (), objective: str = "rmse",
    n_trees: int = N_TREES, bootstrap: bool = True,
) -> Forest:
    """Bagged trees; tree ``t`` draws its bootstrap and candidates from stream (seed, t).

    NaNs are replaced by column medians of ``X`` before fitting; the medians
    are stored for prediction.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    columns = list(columns)
    if X.shape[1] != len(columns):
        raise SchemaError("column catalog does not match X")
    medians = impute_medians(X)
    Xi = np.ascontiguousarray(apply_imputation(X, medians))
    col_index = {c: i for i, c in enumerate(columns)}
    pool, always = _column_split(len(columns), [col_index[c] for c in always_split])
    binned = bin_columns(Xi)
    n = y.size
    oob_sum = np.zeros(n)
    oob_cnt = np.zeros(n, np.int64)
    trees = []
    for rng in tree_streams(seed, n_trees):
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        tree, _ = _grow_binned(
            binned, y, rows.astype(np.int64), mtry, min_node_size, pool, always, tree_seed, False
        )
        trees.append(tree)
        if bootstrap:
            oob = np.ones(n, bool)
            oob[rows] = False
            if oob.any():
                oob_sum[oob] += tree.predict(Xi[oob])
                oob_cnt[oob] += 1
    forest = Forest(
        columns, medians, list(always_split), int(mtry), int(min_node_size), int(seed),
        objective, trees, bootstrap=bootstrap,
    )
    if bootstrap:
        have = oob_cnt > 0
        pred = np.full(n, np.nan)
        pred[have] = oob_sum[have] / oob_cnt[have]
        forest.oob_prediction = pred
        forest.oob_excluded = int(n - have.sum())
        forest.oob_score = score(pred[have], y[have], objective)
    return forest


def oob_score(forest: Forest, y, objective: str | None = None) -> float:
    """OOB objective from the stored OOB predictions; rows OOB for no tree are excluded."""
    if forest.oob_prediction is None:
        raise ValueError("forest was fit without bootstrap")
    y = np.asarray(y, dtype=float)
    have = np.isfinite(forest.oob_prediction)
    return score(forest.oob_prediction[have], y[have], objective or forest.objective)


@dataclass
class TuneResult:
    mtry: int
    min_node_size: int
    score: float
    trace: list[dict]


def _mtry_bounds(n_cols: int, n_free: int) -> tuple[int, int]:
    lo = max(1, math.ceil(math.sqrt(n_cols)) // 2)
    hi = max(lo, min(n_free, n_cols // 2))
    return lo, hi


def tune(
    X, y, columns: Sequence[str], objective: str, seed: int,
    always_split: Sequence[str] = (), n_trees: int = N_TREES,
    warmup: int = WARMUP, refine: int = REFINE,
) -> TuneResult:
    """Random warm-up configurations then local refinement around the incumbent."""
    X = np.asarray(X, dtype=float)
    n, C = X.shape
    if n < 50:
        raise ValueError("tuning needs at least 50 rows")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x7E5]))
    m_lo, m_hi = _mtry_bounds(C, C - len(set(always_split)))
    s_lo, s_hi = 1, max(1, n // 10)

    def log_uniform(lo, hi):
        return int(round(math.exp(rng.uniform(math.log(lo), math.log(hi + 0.5)))))

    def clamp(v, lo, hi):
        return int(min(max(v, lo), hi))

    trace: list[dict] = []

    def evaluate(mtry, mns, phase):
        f = fit_forest(X, y, columns, mtry, mns, seed, always_split, objective, n_trees)
        trace.append({"phase": phase, "mtry": mtry, "min_node_size": mns, "score": f.oob_score})

    for _ in range(warmup):
        evaluate(clamp(log_uniform(m_lo, m_hi), m_lo, m_hi),
                 clamp(log_uniform(s_lo, s_hi), s_lo, s_hi), "warmup")
    for _ in range(refine):
        best = min(trace, key=lambda t: t["score"])
        mtry = clamp(round(best["mtry"] * rng.uniform(0.75, 1.25)), m_lo, m_hi)
        mns = clamp(round(best["min_node_size"] * rng.uniform(0.75, 1.25)), s_lo, s_hi)
        evaluate(mtry, mns, "refine")
    best = min(trace, key=lambda t: t["score"])
    return TuneResult(best["mtry"], best["min_node_size"], best["score"], trace)
