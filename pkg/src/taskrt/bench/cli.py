"""Benchmark command line.

Usage:
    taskrt-bench <matmul|sparselu|nbody> --ms N --bs N ... [--sweep PARAM]

Every flag is mirrored by a TASKRT_-prefixed environment variable
(e.g. --max-ops-thread / TASKRT_MAX_OPS_THREAD); explicit flags win.
"""

from __future__ import annotations

import argparse
import os
import sys

from .harness import BadArgsError, BenchSpec, Report, run, sweep, sweep_csv

ENV_PREFIX = "TASKRT_"
_TRUTHY = ("1", "true", "yes", "on")


def _env(name: str):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))


def _env_int(name: str, fallback):
    raw = _env(name)
    return int(raw) if raw is not None else fallback


def _env_str(name: str, fallback):
    raw = _env(name)
    return raw if raw is not None else fallback


def _env_flag(name: str) -> bool:
    raw = _env(name)
    return raw is not None and raw.strip().lower() in _TRUTHY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskrt-bench",
        description="Task-runtime benchmarks: timed runs, dry-run task "
        "counting, and DDAST parameter sweeps.",
    )
    sub = parser.add_subparsers(dest="benchmark", required=True)
    for name in ("matmul", "sparselu", "nbody"):
        p = sub.add_parser(name)
        if name in ("matmul", "sparselu"):
            p.add_argument("--ms", type=int, default=_env_int("ms", None),
                           required=_env("ms") is None, help="matrix dimension (elements)")
            p.add_argument("--bs", type=int, default=_env_int("bs", None),
                           required=_env("bs") is None, help="block dimension (elements)")
        else:
            p.add_argument("--particles", type=int, default=_env_int("particles", None),
                           required=_env("particles") is None)
            p.add_argument("--timesteps", type=int, default=_env_int("timesteps", None),
                           required=_env("timesteps") is None)
            p.add_argument("--bs", type=int, default=_env_int("bs", None),
                           required=_env("bs") is None, help="particles per block")
        p.add_argument("--threads", type=int, default=_env_int("threads", 4))
        p.add_argument("--mode", choices=("baseline", "ddast"),
                       default=_env_str("mode", "baseline"))
        p.add_argument("--max-ddast-threads", type=int,
                       default=_env_int("max-ddast-threads", None))
        p.add_argument("--max-spins", type=int, default=_env_int("max-spins", None))
        p.add_argument("--max-ops-thread", type=int,
                       default=_env_int("max-ops-thread", None))
        p.add_argument("--min-ready-tasks", type=int,
                       default=_env_int("min-ready-tasks", None))
        p.add_argument("--repetitions", type=int, default=_env_int("repetitions", 5))
        p.add_argument("--trace", default=_env_str("trace", None),
                       help="write an event-trace CSV to this path")
        p.add_argument("--dry-run", action="store_true", default=_env_flag("dry-run"),
                       help="count tasks without executing")
        p.add_argument("--report", choices=("json", "csv"),
                       default=_env_str("report", "json"))
        p.add_argument("--sweep", default=_env_str("sweep", None),
                       choices=("max-ddast-threads", "max-spins",
                                "max-ops-thread", "min-ready-tasks"),
                       help="sweep one DDAST parameter, doubling 1..128")
    return parser


def spec_from_args(args: argparse.Namespace) -> BenchSpec:
    return BenchSpec(
        benchmark=args.benchmark,
        ms=getattr(args, "ms", 0) or 0,
        bs=args.bs or 0,
        particles=getattr(args, "particles", 0) or 0,
        timesteps=getattr(args, "timesteps", 0) or 0,
        threads=args.threads,
        mode=args.mode,
        max_ddast_threads=args.max_ddast_threads,
        max_spins=args.max_spins,
        max_ops_thread=args.max_ops_thread,
        min_ready_tasks=args.min_ready_tasks,
        repetitions=args.repetitions,
        trace=args.trace,
        dry_run=args.dry_run,
        report=args.report,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        if args.sweep:
            print(sweep_csv(sweep(spec, args.sweep)), end="")
        else:
            report: Report = run(spec)
            if spec.report == "json":
                print(report.to_json())
            else:
                print(report.to_csv(), end="")
    except BadArgsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
