"""Command-line entry point: ``fastibl run|compare|verify-equivalence|oracle-check``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import BACKEND
from .envs import SINGLE_STEP_TASKS, TASKS
from .harness import (ExperimentConfig, compare_engines, equivalence_suite_configs, full_scale,
                      oracle_check, run_experiment, verify_equivalence, write_csv)


def _experiment_args(p: argparse.ArgumentParser, engine: bool = True) -> None:
    p.add_argument("--task", choices=TASKS, required=True)
    if engine:
        p.add_argument("--engine", choices=("baseline", "speedy", "both"), default="speedy")
    p.add_argument("--runs", type=int, default=None, help="default 10 (1000 for binary/insider)")
    p.add_argument("--episodes", type=int, default=None, help="default 25 (100 for binary/insider)")
    p.add_argument("--trials", type=int, default=None,
                   help="alias for --episodes on single-step tasks")
    p.add_argument("--steps", type=int, default=2500, help="step limit per episode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="CSV path (per engine when both)")
    p.add_argument("--map", dest="map_path", default=None)
    p.add_argument("--scenario", dest="scenario_path", default=None)
    p.add_argument("--d", dest="decay", type=float, default=0.5)
    p.add_argument("--sigma", dest="noise", type=float, default=0.25)
    p.add_argument("--tau", dest="temperature", type=float, default=None)
    p.add_argument("--default-utility", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    p.add_argument("--full-scale", action="store_true",
                   help="1000x100 (binary/insider) or 100x100 runs x episodes; "
                        "the baseline engine needs hours on grid tasks")


def _config(args, engine: str) -> ExperimentConfig:
    single = args.task in SINGLE_STEP_TASKS
    if args.trials is not None and not single:
        raise SystemExit("--trials only applies to binary and insider; use --episodes")
    runs = args.runs if args.runs is not None else (1000 if single else 10)
    episodes = args.trials if args.trials is not None else args.episodes
    if episodes is None:
        episodes = 100 if single else 25
    config = ExperimentConfig(
        task=args.task, engine=engine, runs=runs, episodes=episodes, steps=args.steps,
        seed=args.seed, decay=args.decay, noise=args.noise, temperature=args.temperature,
        default_utility=args.default_utility, map_path=args.map_path,
        scenario_path=args.scenario_path, workers=args.workers, backend=args.backend)
    return full_scale(config) if args.full_scale else config


def _suffixed(path: Path, engine: str) -> Path:
    return path.with_name(f"{path.stem}_{engine}{path.suffix}")


def cmd_run(args) -> int:
    if args.engine == "both":
        return cmd_compare(args)
    config = _config(args, args.engine)
    table = run_experiment(config)
    print(f"task {config.task}, engine {table.engine}: {config.runs} runs x "
          f"{config.episodes} episodes")
    print(f"  mean metric {table.mean_metric:.4f}, mean time/run {table.mean_time_per_run:.4f} s")
    if args.out:
        write_csv(table, args.out)
        print(f"  wrote {args.out}")
    return 0


def cmd_compare(args) -> int:
    config = _config(args, "both")
    report, tables = compare_engines(config)
    print(report.format())
    if args.out:
        for engine, table in tables.items():
            path = _suffixed(args.out, engine)
            write_csv(table, path)
            print(f"  wrote {path}")
    return 0


def cmd_verify(args) -> int:
    if args.task:
        configs = [replace(c, runs=args.runs) for c in equivalence_suite_configs(args.seed, args.backend)
                   if c.task == args.task]
    else:
        configs = [replace(c, runs=args.runs) for c in equivalence_suite_configs(args.seed, args.backend)]
    ok = True
    for config in configs:
        report = verify_equivalence(config)
        print(report.format())
        ok &= report.passed
    return 0 if ok else 1


def cmd_oracle(args) -> int:
    report = oracle_check(args.cases, args.seed, args.backend)
    print(report.format())
    passed = report.max_deviation < args.tolerance
    print(f"{'PASS' if passed else 'FAIL'} (tolerance {args.tolerance:g})")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastibl", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s (kernels: {BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one engine and write per-episode CSV")
    _experiment_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run both engines on identical seeds")
    _experiment_args(p, engine=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify-equivalence", help="replay both engines in lockstep")
    p.add_argument("--task", choices=TASKS, default=None, help="default: every task")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle-check", help="compare bulk kernels against the scalar oracle")
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--backend", choices=("compiled", "python"), default=None)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
