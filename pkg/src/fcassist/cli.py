"""Command-line entry point: one subcommand per pipeline stage plus single-series serving."""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from collections import Counter
from pathlib import Path

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

STAGE_COMMANDS = (
    "ingest", "expand", "features", "evaluate-pool", "targets", "train-meta", "benchmark", "report",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fcassist", description="Meta-learned forecasting ensembles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in STAGE_COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} stage")
        sp.add_argument("--config", required=True, help="experiment config (INI)")
        sp.add_argument("--workdir", required=True, help="artifact directory")
        sp.add_argument("--force", action="store_true", help="rerun even if outputs are current")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes (results do not depend on it)")
        if name == "expand":
            sp.add_argument("--frequency", choices=("daily", "weekly", "monthly"),
                            help="only print counts for this frequency")
    fp = sub.add_parser("forecast", help="serve one series with trained meta-learners")
    fp.add_argument("--series", required=True,
                    help="series CSV: rows 'id,frequency,v1,v2,...' (first row unless --id)")
    fp.add_argument("--id", help="series id to pick from the file")
    fp.add_argument("--horizon", type=int, required=True)
    fp.add_argument("--mode", choices=("simple", "weighted"), default="weighted")
    fp.add_argument("--a1", required=True, help="ranker forest JSON")
    fp.add_argument("--a2", required=True, help="capper forest JSON for the chosen mode")
    fp.add_argument("--out-csv", help="also write the pooled forecast as step,value CSV")
    return p


def _print_counts(workdir: Path, frequency: str | None) -> None:
    from .experiment import SEGMENTS
    from .pipeline import read_rows

    rows = read_rows(workdir / SEGMENTS)
    initial = Counter((r["frequency"], int(r["horizon"])) for r in rows if r["split_kind"] == "full")
    final = Counter((r["frequency"], int(r["horizon"])) for r in rows)
    keys = sorted(final, key=lambda k: (("daily", "weekly", "monthly").index(k[0]), k[1]))
    if frequency:
        keys = [k for k in keys if k[0] == frequency]
    print("frequency,horizon,initial,final")
    for k in keys:
        print(f"{k[0]},{k[1]},{initial[k]},{final[k]}")
    for f in dict.fromkeys(k[0] for k in keys):
        ks = [k for k in keys if k[0] == f]
        print(f"{f},sum,{sum(initial[k] for k in ks)},{sum(final[k] for k in ks)}")
    print(f"all,sum,{sum(initial[k] for k in keys)},{sum(final[k] for k in keys)}")


def _run_stage(args) -> int:
    from .config import load_config
    from .experiment import run_stage
    from .pipeline import Workdir

    cfg = load_config(args.config)
    wd = Workdir(args.workdir, cfg)
    result = run_stage(wd, args.command, jobs=max(1, args.jobs), force=args.force)
    if result is None:
        print(f"stage '{args.command}' is up to date; use --force to rerun", file=sys.stderr)
    if args.command == "expand":
        _print_counts(wd.root, args.frequency)
    elif result is not None:
        print(json.dumps(result, indent=2, default=str))
    return EXIT_OK


def _forecast(args) -> int:
    from .ensemble import forecast
    from .forest import Forest
    from .series import read_series_csv

    with open(args.series, newline="") as fh:
        series = read_series_csv(fh)
    if args.id:
        series = [s for s in series if s.id == args.id]
        if not series:
            raise LookupError(f"series {args.id!r} not found in {args.series}")
    if not series:
        raise LookupError(f"no series in {args.series}")
    if args.horizon < 1:
        raise UsageError("--horizon must be positive")
    a1 = Forest.from_json(Path(args.a1).read_text())
    a2 = Forest.from_json(Path(args.a2).read_text())
    rec = forecast(series[0], args.horizon, a1, a2, args.mode)
    print(rec.to_json())
    if args.out_csv:
        with open(args.out_csv, "w", newline="") as fh:
            rec.write_forecast_csv(fh)
    return EXIT_OK


def main(argv=None) -> int:
    from .config import ConfigError
    from .forest import SchemaError
    from .pipeline import StageError
    from .series import SeriesError

    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "forecast":
            return _forecast(args)
        return _run_stage(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        name = exc.filename or str(exc)
        print(f"error: file not found: {name}", file=sys.stderr)
        return EXIT_DATA
    except (SeriesError, ConfigError, StageError, SchemaError, LookupError,
            json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
