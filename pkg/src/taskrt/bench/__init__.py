"""Benchmark workloads, harness, and CLI for the task runtime."""

from .harness import (
    BadArgsError,
    BenchSpec,
    Report,
    SweepRow,
    VerificationFailedError,
    dry_run_count,
    run,
    sweep,
    sweep_csv,
)

__all__ = [
    "BadArgsError",
    "BenchSpec",
    "Report",
    "SweepRow",
    "VerificationFailedError",
    "dry_run_count",
    "run",
    "sweep",
    "sweep_csv",
]
