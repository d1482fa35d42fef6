"""Report tables: mean ± 1.96·SEM per (frequency, horizon), per frequency and overall."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

REPORT_METRICS = ("smape", "maape", "mase")
Z = 1.96


@dataclass
class Interval:
    mean: float
    halfwidth: float
    n: int
    flagged: bool = False  # fewer than two values

    def __iter__(self):
        return iter((self.mean, self.halfwidth))

    def __getitem__(self, i):
        return (self.mean, self.halfwidth)[i]


def interval(values) -> Interval:
    """Mean ± 1.96·sd/√n with the population sd; NaNs are dropped first."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return Interval(math.nan, math.nan, 0, True)
    if v.size < 2:
        return Interval(float(v[0]), 0.0, 1, True)
    return Interval(float(v.mean()), float(Z * v.std() / math.sqrt(v.size)), int(v.size))


@dataclass
class TableRow:
    frequency: str  # "all" for the grand total
    horizon: str  # horizon or "sum"
    cells: dict[str, Interval]


def build_tables(
    rows: Sequence[Mapping[str, str]], methods: Sequence[str], frequencies: Sequence[str],
) -> dict[str, list[TableRow]]:
    """Per metric: horizon rows, a per-frequency sum row, then a grand sum row.

    Sum rows pool the per-segment values of their constituents.
    """
    freq_order = {f: i for i, f in enumerate(frequencies)}
    values: dict[tuple[str, int, str, str], list[float]] = {}
    for r in rows:
        for metric in REPORT_METRICS:
            key = (r["frequency"], int(r["horizon"]), r["method"], metric)
            values.setdefault(key, []).append(float(r[metric]))
    groups = sorted({(k[0], k[1]) for k in values}, key=lambda g: (freq_order.get(g[0], 99), g[0], g[1]))
    tables: dict[str, list[TableRow]] = {}
    for metric in REPORT_METRICS:
        out = []

        def pooled(pred, method):
            acc = []
            for (f, h) in groups:
                if pred(f, h):
                    acc.extend(values.get((f, h, method, metric), []))
            return interval(acc)

        for freq in dict.fromkeys(f for f, _ in groups):
            for f, h in groups:
                if f == freq:
                    out.append(TableRow(f, str(h), {m: interval(values.get((f, h, m, metric), []))
                                                    for m in methods}))
            out.append(TableRow(freq, "sum", {m: pooled(lambda f, h: f == freq, m) for m in methods}))
        out.append(TableRow("all", "sum", {m: pooled(lambda f, h: True, m) for m in methods}))
        tables[metric] = out
    return tables


def write_table_csv(path: Path, table: list[TableRow], methods: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = ["frequency", "horizon", "n"]
        for m in methods:
            header += [m, f"{m}_halfwidth"]
        w.writerow(header)
        for row in table:
            n = row.cells[methods[0]].n
            line = [row.frequency, row.horizon, n]
            for m in methods:
                c = row.cells[m]
                line += [repr(c.mean), repr(c.halfwidth)]
            w.writerow(line)


def markdown(tables: Mapping[str, list[TableRow]], methods: Sequence[str]) -> str:
    parts = []
    for metric, table in tables.items():
        head = ["frequency", "horizon", "n"] + list(methods)
        body = []
        for row in table:
            cells = [f"{row.cells[m].mean:.3f} ± {row.cells[m].halfwidth:.3f}" for m in methods]
            label = "Σ" if row.horizon == "sum" else row.horizon
            body.append([row.frequency, label, str(row.cells[methods[0]].n)] + cells)
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]

        def line(cells):
            return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

        parts.append(f"## {metric.upper()}\n")
        parts.append(line(head))
        parts.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
        parts.extend(line(r) for r in body)
        parts.append("")
    return "\n".join(parts)
