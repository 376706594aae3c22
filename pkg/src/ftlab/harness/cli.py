"""Command line entry point: ftlab run | list-systems | check."""
from __future__ import annotations

import argparse
import json
import os
import sys

from ..system import builtin_systems
from .config import ConfigError, ExperimentConfig
from .experiments import check_system, run_experiment
from .report import jsonable


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftlab", description="front-tracking stability lab")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--nu", type=float)
    run.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sub.add_parser("list-systems", help="list builtin flux systems")
    chk = sub.add_parser("check", help="hypothesis report for one system")
    chk.add_argument("system")
    chk.add_argument("--n", type=int, default=50)
    chk.add_argument("--radius", type=float)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-systems":
        for s in builtin_systems():
            ent = "entropy" if s.entropy is not None else "no entropy"
            print(f"{s.name}\tcenter={list(map(float, s.center))}\tradius={s.radius}\t{ent}")
        return 0
    if args.command == "check":
        try:
            rep = check_system(args.system, args.n, args.radius)
        except KeyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(json.dumps(jsonable(rep), indent=2, sort_keys=True))
        return 0 if rep["gnl_positive"] else 1
    try:
        cfg = ExperimentConfig.load(args.config).with_overrides(seed=args.seed, nu=args.nu, output_dir=args.out)
    except (OSError, ValueError, TypeError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rep = run_experiment(cfg, jobs=max(1, args.jobs))
    out = cfg.output_dir or os.path.join("runs", cfg.experiment)
    rep.write(out)
    for line in rep.summary_lines():
        print(line)
    print(f"report written to {out} ({rep.runtime:.1f} s)")
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
