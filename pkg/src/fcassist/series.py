"""Time series containers, transforms, M4-style ingestion and segmentation.

Series are plain ordered sequences; no calendar handling is attempted. A
segment is a single hold-out split of a source series at one horizon,
restricted to splits where the training part is at least four times as long
as the test part.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

FREQUENCIES = ("daily", "weekly", "monthly")

PERIODS = {"daily": 7, "weekly": 52, "monthly": 12}

HORIZONS = {
    "daily": (15, 30, 90, 180, 365, 730),
    "weekly": (4, 13, 26, 52, 104),
    "monthly": (6, 12, 24, 60, 120),
}

M4_EXCLUDED = ("M19700", "M19505")

SPLIT_KINDS = ("full", "older_half", "newer_half")


class SeriesError(ValueError):
    """Invalid or degenerate series input."""


class ParseError(SeriesError):
    def __init__(self, row: str, column: int, message: str):
        super().__init__(f"row {row}, column {column}: {message}")
        self.row = row
        self.column = column


class EligibilityError(SeriesError):
    """Hold-out split violates the 80/20 rule."""


@dataclass(frozen=True, eq=False)
class TimeSeries:
    id: str
    frequency: str
    values: np.ndarray

    def __post_init__(self):
        if self.frequency not in PERIODS:
            raise SeriesError(f"unknown frequency {self.frequency!r}")
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise SeriesError(f"series {self.id!r} is empty")
        if not np.all(np.isfinite(values)):
            raise SeriesError(f"series {self.id!r} has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def period(self) -> int:
        return PERIODS[self.frequency]

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.id == other.id
            and self.frequency == other.frequency
            and np.array_equal(self.values, other.values)
        )

    def with_values(self, values, id: str | None = None) -> "TimeSeries":
        return TimeSeries(self.id if id is None else id, self.frequency, values)


@dataclass(frozen=True, eq=False)
class Segment:
    segment_id: str
    source_id: str
    split_kind: str
    horizon: int
    train: TimeSeries
    test: np.ndarray = field(repr=False)
    start: int = 0

    @property
    def frequency(self) -> str:
        return self.train.frequency


def first_difference(s: TimeSeries) -> TimeSeries:
    if len(s) < 2:
        raise SeriesError(f"series {s.id!r} needs at least 2 values to difference")
    return s.with_values(np.diff(s.values))


def log_transform(s: TimeSeries) -> TimeSeries:
    """Natural log, shifting non-positive data to start at 1 first."""
    x = s.values
    lo = x.min()
    if lo > 0:
        return s.with_values(np.log(x))
    return s.with_values(np.log(x - lo + 1.0))


def eligible_horizons(n: int, frequency: str) -> list[int]:
    return [h for h in HORIZONS[frequency] if n >= 5 * h]


def holdout_split(s: TimeSeries, h: int) -> tuple[TimeSeries, np.ndarray]:
    if h < 1 or len(s) < 5 * h:
        raise EligibilityError(
            f"series {s.id!r} of length {len(s)} is too short for horizon {h} "
            f"(needs {5 * h})"
        )
    return s.with_values(s.values[:-h]), s.values[-h:].copy()


def _segments_of(
    s: TimeSeries, kind: str, start: int, values: np.ndarray, horizons: Iterable[int] | None
) -> Iterator[Segment]:
    grid = eligible_horizons(values.size, s.frequency)
    if horizons is not None:
        allowed = set(horizons)
        grid = [h for h in grid if h in allowed]
    if not grid:
        return
    part = s.with_values(values)
    for h in grid:
        train, test = holdout_split(part, h)
        yield Segment(
            segment_id=f"{s.id}/{kind}/h{h}",
            source_id=s.id,
            split_kind=kind,
            horizon=h,
            train=train,
            test=test,
            start=start,
        )


def expand_initial(
    series: Iterable[TimeSeries], horizons: Iterable[int] | None = None
) -> list[Segment]:
    """One segment per series and eligible horizon, testing on the latest values."""
    horizons = None if horizons is None else tuple(horizons)
    out = []
    for s in series:
        out.extend(_segments_of(s, "full", 0, s.values, horizons))
    return out


def half_point(n: int) -> int:
    return n // 2


def expand_augmented(
    series: Iterable[TimeSeries], horizons: Iterable[int] | None = None
) -> list[Segment]:
    """Initial expansion plus splits of the older and newer halves of each series.

    Each half is segmented as a standalone series, so its own length decides
    which horizons are eligible.
    """
    horizons = None if horizons is None else tuple(horizons)
    out = []
    for s in series:
        out.extend(_segments_of(s, "full", 0, s.values, horizons))
        m = half_point(len(s))
        out.extend(_segments_of(s, "older_half", 0, s.values[:m], horizons))
        out.extend(_segments_of(s, "newer_half", m, s.values[m:], horizons))
    return out


def segment_slice(source: TimeSeries, split_kind: str, horizon: int) -> tuple[int, int]:
    """(start, stop) of train ++ test inside the source series."""
    n = len(source)
    m = half_point(n)
    if split_kind == "full":
        return 0, n
    if split_kind == "older_half":
        return 0, m
    if split_kind == "newer_half":
        return m, n
    raise SeriesError(f"unknown split kind {split_kind!r}")


def rebuild_segment(source: TimeSeries, split_kind: str, horizon: int) -> Segment:
    start, stop = segment_slice(source, split_kind, horizon)
    part = source.with_values(source.values[start:stop])
    train, test = holdout_split(part, horizon)
    return Segment(
        f"{source.id}/{split_kind}/h{horizon}",
        source.id,
        split_kind,
        horizon,
        train,
        test,
        start,
    )


def parse_segment_id(segment_id: str) -> tuple[str, str, int]:
    source_id, kind, h = segment_id.rsplit("/", 2)
    if kind not in SPLIT_KINDS or not h.startswith("h"):
        raise SeriesError(f"malformed segment id {segment_id!r}")
    return source_id, kind, int(h[1:])


def _is_header(row: Sequence[str]) -> bool:
    return bool(row) and row[0].strip().upper() == "V1"


def parse_m4_csv(
    text: str | io.TextIOBase,
    frequency: str,
    exclude: Iterable[str] = (),
) -> list[TimeSeries]:
    """Parse M4-style rows ``id,v1,v2,...`` into series of one frequency.

    A leading ``V1,V2,...`` header is skipped. Trailing empty cells are
    stripped; an empty cell in the middle of a row is a parse error.
    """
    if frequency not in PERIODS:
        raise SeriesError(f"unknown frequency {frequency!r}")
    stream = io.StringIO(text) if isinstance(text, str) else text
    excluded = set(exclude)
    out = []
    for lineno, row in enumerate(csv.reader(stream)):
        if not row or (lineno == 0 and _is_header(row)):
            continue
        sid = row[0].strip()
        cells = [c.strip() for c in row[1:]]
        while cells and cells[-1] == "":
            cells.pop()
        if not cells:
            raise ParseError(sid, 1, f"series {sid!r} has no values")
        values = []
        for col, cell in enumerate(cells, start=2):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(sid, col, f"non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(sid, col, f"non-finite value {cell!r}")
            values.append(v)
        if sid in excluded:
            continue
        out.append(TimeSeries(sid, frequency, np.array(values)))
    return out


def concat_train_test(train: list[TimeSeries], test: list[TimeSeries]) -> list[TimeSeries]:
    """Join M4 train and test files by series id (test appended)."""
    tail = {s.id: s.values for s in test}
    return [
        s.with_values(np.concatenate([s.values, tail[s.id]])) if s.id in tail else s
        for s in train
    ]


def write_series_csv(series: Iterable[TimeSeries], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    for s in series:
        writer.writerow([s.id, s.frequency, *(repr(float(v)) for v in s.values)])


def read_series_csv(stream) -> list[TimeSeries]:
    """Read the normalized store written by :func:`write_series_csv`."""
    out = []
    for row in csv.reader(stream):
        if row:
            out.append(TimeSeries(row[0], row[1], np.array([float(v) for v in row[2:]])))
    return out


SEGMENT_COLUMNS = ("segment_id", "source_id", "split_kind", "frequency", "horizon", "train_len")


def write_segments_csv(segments: Iterable[Segment], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SEGMENT_COLUMNS)
    for seg in segments:
        writer.writerow(
            [seg.segment_id, seg.source_id, seg.split_kind, seg.frequency, seg.horizon, len(seg.train)]
        )


def read_segments_csv(stream, sources: dict[str, TimeSeries]) -> list[Segment]:
    out = []
    for rec in csv.DictReader(stream):
        src = sources[rec["source_id"]]
        seg = rebuild_segment(src, rec["split_kind"], int(rec["horizon"]))
        if len(seg.train) != int(rec["train_len"]):
            raise SeriesError(f"segment {seg.segment_id} does not match its source")
        out.append(seg)
    return out


def write_segment_values_csv(segments: Iterable[Segment], stream) -> None:
    """Long-format value store ``segment_id,role,index,value``."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("segment_id", "role", "index", "value"))
    for seg in segments:
        for i, v in enumerate(seg.train.values):
            writer.writerow((seg.segment_id, "train", i, repr(float(v))))
        for i, v in enumerate(seg.test):
            writer.writerow((seg.segment_id, "test", i, repr(float(v))))
