import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

M4_ENV = "FCASSIST_M4_DIR"


def m4_dir() -> Path | None:
    d = os.environ.get(M4_ENV)
    if d and Path(d, "Monthly-train.csv").exists():
        return Path(d)
    return None


requires_m4 = pytest.mark.skipif(m4_dir() is None, reason=f"M4-micro data not found (set {M4_ENV})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


TINY_CONFIG = """
[data]
source = synthetic
frequencies = monthly
n_series = 20

[expansion]
horizons = 6

[forest]
n_trees = 16
tune_trees = 4
warmup = 2
refine = 1

[seeds]
corpus = 5
sample = 1
folds = 3
forest = 9
"""


@pytest.fixture(scope="session")
def tiny_config(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "tiny.ini"
    p.write_text(TINY_CONFIG)
    return p


@pytest.fixture(scope="session")
def tiny_run(tiny_config, tmp_path_factory):
    """Work directory of a complete small experiment, shared read-only across tests."""
    from fcassist.config import load_config
    from fcassist.experiment import run_experiment

    root = tmp_path_factory.mktemp("tiny_run")
    summary = run_experiment(load_config(tiny_config), root)
    return root, summary


# acceptance verdicts, echoed again in the terminal summary
_VERDICTS: list[str] = []


class Verdict:
    def __call__(self, criterion: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f": {detail}" if detail else "")
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    def skip(self, criterion: str, reason: str) -> None:
        line = f"[SKIP] {criterion}: {reason}"
        _VERDICTS.append(line)
        pytest.skip(reason)


@pytest.fixture
def verdict():
    return Verdict()


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
