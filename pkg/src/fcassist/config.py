"""Experiment configuration (INI-style key = value).

Schema, with defaults::

    [data]
    source = synthetic           ; synthetic | m4 | csv
    path =                       ; m4: directory with <Frequency>-train/test.csv; csv: series store
    frequencies = monthly        ; comma list of daily, weekly, monthly
    n_series = 300               ; seeded sample size per frequency, 0 = all
    exclude = M19700, M19505
    synthetic_min_length = 48
    synthetic_max_length = 180

    [expansion]
    horizons =                   ; comma list; empty = full grid of each frequency

    [pool]
    models = all                 ; all | comma list of model ids
    runtime_source = nominal     ; nominal | measured (runtime used for rank ties)

    [features]
    registry_version = 1

    [folds]
    embedding = pca3             ; pca3 | tsne3 | external
    external_path =              ; CSV source_id,e1,e2,e3 when embedding = external

    [forest]
    n_trees = 256
    tune_trees = 256
    warmup = 21
    refine = 9

    [seeds]                      ; all mandatory
    corpus = ...
    sample = ...
    folds = ...
    forest = ...
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .features.registry import REGISTRY_VERSION
from .models import MODEL_IDS
from .series import FREQUENCIES, HORIZONS, M4_EXCLUDED

SEED_KEYS = ("corpus", "sample", "folds", "forest")


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    seeds: dict[str, int]
    source: str = "synthetic"
    path: str = ""
    frequencies: tuple[str, ...] = ("monthly",)
    n_series: int = 300
    exclude: tuple[str, ...] = tuple(M4_EXCLUDED)
    synthetic_min_length: int = 48
    synthetic_max_length: int = 180
    horizons: tuple[int, ...] = ()
    models: tuple[str, ...] = MODEL_IDS
    runtime_source: str = "nominal"
    registry_version: str = REGISTRY_VERSION
    embedding: str = "pca3"
    external_path: str = ""
    n_trees: int = 256
    tune_trees: int = 256
    warmup: int = 21
    refine: int = 9
    base_dir: str = field(default=".", compare=False)

    def horizons_for(self, frequency: str) -> tuple[int, ...]:
        grid = HORIZONS[frequency]
        if not self.horizons:
            return tuple(grid)
        return tuple(h for h in self.horizons if h in grid)

    def resolve(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else Path(self.base_dir) / q

    def digest(self) -> str:
        d = asdict(self)
        d.pop("base_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def parse_config(text: str, base_dir: str = ".") -> Config:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    if not cp.has_section("seeds"):
        raise ConfigError("config needs a [seeds] section")
    seeds = {}
    for k in SEED_KEYS:
        if not cp.has_option("seeds", k):
            raise ConfigError(f"seed '{k}' is mandatory in [seeds]")
        try:
            seeds[k] = cp.getint("seeds", k)
        except ValueError:
            raise ConfigError(f"seed '{k}' must be an integer") from None

    def get(section, key, default):
        return cp.get(section, key, fallback=default) if cp.has_section(section) else default

    def get_int(section, key, default):
        try:
            return int(get(section, key, str(default)))
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be an integer") from None

    cfg = Config(seeds=seeds, base_dir=base_dir)
    cfg.source = get("data", "source", cfg.source)
    cfg.path = get("data", "path", cfg.path)
    cfg.frequencies = _csv_list(get("data", "frequencies", ",".join(cfg.frequencies)))
    cfg.n_series = get_int("data", "n_series", cfg.n_series)
    cfg.exclude = _csv_list(get("data", "exclude", ",".join(cfg.exclude)))
    cfg.synthetic_min_length = get_int("data", "synthetic_min_length", cfg.synthetic_min_length)
    cfg.synthetic_max_length = get_int("data", "synthetic_max_length", cfg.synthetic_max_length)
    try:
        cfg.horizons = tuple(int(h) for h in _csv_list(get("expansion", "horizons", "")))
    except ValueError:
        raise ConfigError("[expansion] horizons must be integers") from None
    models = get("pool", "models", "all").strip()
    cfg.models = MODEL_IDS if models == "all" else _csv_list(models)
    cfg.runtime_source = get("pool", "runtime_source", cfg.runtime_source)
    cfg.registry_version = get("features", "registry_version", cfg.registry_version)
    cfg.embedding = get("folds", "embedding", cfg.embedding)
    cfg.external_path = get("folds", "external_path", cfg.external_path)
    cfg.n_trees = get_int("forest", "n_trees", cfg.n_trees)
    cfg.tune_trees = get_int("forest", "tune_trees", cfg.tune_trees)
    cfg.warmup = get_int("forest", "warmup", cfg.warmup)
    cfg.refine = get_int("forest", "refine", cfg.refine)
    validate(cfg)
    return cfg


def validate(cfg: Config) -> None:
    if cfg.source not in ("synthetic", "m4", "csv"):
        raise ConfigError(f"unknown data source {cfg.source!r}")
    if cfg.source in ("m4", "csv") and not cfg.path:
        raise ConfigError(f"data source {cfg.source!r} needs [data] path")
    for f in cfg.frequencies:
        if f not in FREQUENCIES:
            raise ConfigError(f"unknown frequency {f!r}")
    unknown = [m for m in cfg.models if m not in MODEL_IDS]
    if unknown:
        raise ConfigError(f"unknown models {unknown}")
    if len(cfg.models) < 2:
        raise ConfigError("the pool needs at least two models")
    if cfg.runtime_source not in ("nominal", "measured"):
        raise ConfigError("runtime_source must be nominal or measured")
    if cfg.registry_version != REGISTRY_VERSION:
        raise ConfigError(
            f"feature registry version {cfg.registry_version} requested, {REGISTRY_VERSION} installed"
        )
    if cfg.embedding not in ("pca3", "tsne3", "external"):
        raise ConfigError(f"unknown embedding {cfg.embedding!r}")
    if cfg.embedding == "external" and not cfg.external_path:
        raise ConfigError("embedding = external needs [folds] external_path")
    if min(cfg.n_trees, cfg.tune_trees) < 1 or min(cfg.warmup, cfg.refine) < 0:
        raise ConfigError("forest sizes must be positive")


def load_config(path: str | Path) -> Config:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {p}: {exc.strerror}") from None
    return parse_config(text, base_dir=str(p.parent))
