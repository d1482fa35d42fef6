"""Stage pipeline over a work directory with a hash manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .config import Config

MANIFEST = "manifest.json"


class StageError(RuntimeError):
    """A stage's upstream artifact is missing."""


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Workdir:
    def __init__(self, root: str | Path, cfg: Config):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.manifest_path = self.root / MANIFEST
        if self.manifest_path.exists():
            self.manifest = json.loads(self.manifest_path.read_text())
        else:
            self.manifest = {}
        if self.manifest.get("config_hash") != cfg.digest():
            # a different configuration invalidates every recorded stage
            self.manifest = {"config_hash": cfg.digest(), "seeds": cfg.seeds, "stages": {}}

    def path(self, name: str) -> Path:
        p = self.root / name
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def require(self, *names: str, stage: str) -> None:
        for n in names:
            if not (self.root / n).exists():
                raise StageError(f"missing artifact {self.root / n}; run the '{stage}' stage first")

    def is_complete(self, stage: str) -> bool:
        rec = self.manifest["stages"].get(stage)
        if rec is None:
            return False
        for name, digest in rec["outputs"].items():
            p = self.root / name
            if not p.exists():
                return False
            if name not in rec.get("volatile", []) and sha256_file(p) != digest:
                return False
        return True

    def record(self, stage: str, outputs: Sequence[str], volatile: Sequence[str] = (),
               inputs: Sequence[str] = ()) -> None:
        self.manifest["stages"][stage] = {
            "inputs": {n: sha256_file(self.root / n) for n in inputs},
            "outputs": {n: sha256_file(self.root / n) for n in outputs},
            "volatile": list(volatile),
            "completed": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }
        self.manifest_path.write_text(json.dumps(self.manifest, indent=2, sort_keys=True))

    def invalidate_from(self, stages: Iterable[str]) -> None:
        for s in stages:
            self.manifest["stages"].pop(s, None)


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Order-preserving map; ``jobs`` > 1 uses worker processes."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (8 * jobs))))


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_rows(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def fmt(x: float) -> str:
    return repr(float(x))
