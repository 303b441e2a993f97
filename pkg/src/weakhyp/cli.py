"""Command-line entry point.

Usage: ``weakhyp <subcommand> --config cfg.json [--out DIR] [--jobs K]
[--seed N]`` with subcommands ``solve``, ``roundtrip``, ``symmetriser``,
``sweep`` and ``reduce``.  Exit status 0 only when every check declared in
the config passed and all stages completed.
"""

from __future__ import annotations

import argparse
import sys

from .config import config_echo, config_hash, load_config
from .errors import ConfigurationError, WeakHypError
from .experiments import DRIVERS
from .reports import write_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakhyp",
        description="Numerical laboratory for weakly hyperbolic problems "
                    "with rough time-dependent coefficients")
    parser.add_argument("subcommand", choices=sorted(DRIVERS))
    parser.add_argument("--config", required=True,
                        help="path to the JSON experiment configuration")
    parser.add_argument("--out", default="out",
                        help="output directory (created if missing)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker cap for per-frequency work; results "
                             "are identical for every value")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigurationError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"config error: {exc}{field}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else cfg.seed
    driver = DRIVERS[args.subcommand]
    try:
        record = driver(cfg, max(args.jobs, 1), seed)
    except WeakHypError as exc:
        from pathlib import Path
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.echo").write_text(config_echo(cfg), encoding="utf-8")
        write_json(out / "summary.json", {
            "subcommand": args.subcommand,
            "config_hash": config_hash(cfg),
            "complete": False,
            "error": f"{type(exc).__name__}: {exc}",
        })
        print(f"stage failure: {exc}", file=sys.stderr)
        return 1
    record.write(args.out, config_echo(cfg))
    status = 0 if (record.complete and record.checks_passed) else 1
    checks = record.summary.get("checks", [])
    for entry in checks:
        mark = "pass" if entry["passed"] else "FAIL"
        print(f"[{mark}] {entry['metric']} = {entry['value']} "
              f"(ceiling {entry['ceiling']})")
    if not record.complete:
        print("run incomplete: see summary.json", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
