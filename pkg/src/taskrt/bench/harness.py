"""Benchmark harness: validated specs, timed runs, reports, and sweeps.

A run executes the requested repetitions, timing from after the sequential
initialization to after the final global taskwait, reports the best time,
and verifies the numeric output bitwise against a sequential execution of
the same kernel sequence before reporting.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import time
from dataclasses import dataclass, field
from typing import Optional

from ..ddast import DdastConfig, default_config
from ..runtime import Runtime, RuntimeMode
from . import matmul, nbody, sparselu

SWEEP_VALUES = (1, 2, 4, 8, 16, 32, 64, 128)
SWEEP_PARAMS = ("max_ddast_threads", "max_spins", "max_ops_thread", "min_ready_tasks")
SWEEP_CSV_HEADER = "param,value,best_ns,speedup"


class BadArgsError(ValueError):
    pass


class VerificationFailedError(RuntimeError):
    """Parallel output differs from the sequential reference."""


@dataclass
class BenchSpec:
    benchmark: str
    ms: int = 0
    bs: int = 0
    particles: int = 0
    timesteps: int = 0
    threads: int = 4
    mode: RuntimeMode = RuntimeMode.BASELINE
    max_ddast_threads: Optional[int] = None
    max_spins: Optional[int] = None
    max_ops_thread: Optional[int] = None
    min_ready_tasks: Optional[int] = None
    repetitions: int = 5
    trace: Optional[str] = None
    dry_run: bool = False
    report: str = "json"

    def __post_init__(self):
        if isinstance(self.mode, str):
            try:
                self.mode = RuntimeMode(self.mode)
            except ValueError:
                raise BadArgsError(f"unknown mode {self.mode!r}") from None
        self.validate()

    def validate(self) -> None:
        if self.benchmark not in ("matmul", "sparselu", "nbody"):
            raise BadArgsError(f"unknown benchmark {self.benchmark!r}")
        if self.benchmark in ("matmul", "sparselu"):
            if self.ms <= 0 or self.bs <= 0:
                raise BadArgsError("ms and bs must be positive")
            if self.ms % self.bs != 0:
                raise BadArgsError("ms must be divisible by bs")
        else:
            if self.particles <= 0 or self.bs <= 0 or self.timesteps <= 0:
                raise BadArgsError("particles, bs, timesteps must be positive")
            if self.particles % self.bs != 0:
                raise BadArgsError("particles must be divisible by bs")
        if self.threads < 1:
            raise BadArgsError("threads must be >= 1")
        if self.repetitions < 1:
            raise BadArgsError("repetitions must be >= 1")
        if self.report not in ("json", "csv"):
            raise BadArgsError(f"unknown report format {self.report!r}")

    def ddast_config(self) -> DdastConfig:
        cfg = default_config(self.threads)
        overrides = {
            name: getattr(self, name)
            for name in SWEEP_PARAMS
            if getattr(self, name) is not None
        }
        return cfg.replace(**overrides) if overrides else cfg

    def config_echo(self) -> dict:
        cfg = self.ddast_config()
        return {
            "benchmark": self.benchmark,
            "ms": self.ms,
            "bs": self.bs,
            "particles": self.particles,
            "timesteps": self.timesteps,
            "threads": self.threads,
            "mode": self.mode.value,
            "ddast": {
                "max_ddast_threads": cfg.max_ddast_threads,
                "max_spins": cfg.max_spins,
                "max_ops_thread": cfg.max_ops_thread,
                "min_ready_tasks": cfg.min_ready_tasks,
            },
        }


@dataclass
class Report:
    spec: BenchSpec
    times_ns: list[int]
    task_count: int
    counters: dict = field(default_factory=dict)

    @property
    def best_ns(self) -> Optional[int]:
        return min(self.times_ns) if self.times_ns else None

    def as_dict(self) -> dict:
        d = self.spec.config_echo()
        d["times_ns"] = self.times_ns
        d["best_ns"] = self.best_ns
        d["task_count"] = self.task_count
        d["counters"] = self.counters
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def to_csv(self) -> str:
        d = self.as_dict()
        d.update(d.pop("ddast"))
        d["times_ns"] = ";".join(str(t) for t in d["times_ns"])
        d["counters"] = ";".join(f"{k}={v}" for k, v in d.pop("counters").items())
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(d.keys())
        writer.writerow(d.values())
        return buf.getvalue()


class _MatmulBench:
    @staticmethod
    def count(spec):
        return matmul.task_count(spec.ms, spec.bs)

    @staticmethod
    def make(spec):
        return matmul.make(spec.ms, spec.bs)

    @staticmethod
    def spawn(rt, state, spec):
        matmul.spawn(rt, state)

    @staticmethod
    def run_sequential(state, spec):
        matmul.run_sequential(state)

    output = staticmethod(matmul.output)


class _SparseLUBench:
    @staticmethod
    def count(spec):
        return sparselu.task_count(spec.ms, spec.bs)

    @staticmethod
    def make(spec):
        return sparselu.make(spec.ms, spec.bs)

    @staticmethod
    def spawn(rt, state, spec):
        sparselu.spawn(rt, state)

    @staticmethod
    def run_sequential(state, spec):
        sparselu.run_sequential(state)

    output = staticmethod(sparselu.output)


class _NBodyBench:
    @staticmethod
    def count(spec):
        return nbody.task_count(spec.particles, spec.timesteps, spec.bs)

    @staticmethod
    def make(spec):
        return nbody.make(spec.particles, spec.bs)

    @staticmethod
    def spawn(rt, state, spec):
        nbody.spawn(rt, state, spec.timesteps)

    @staticmethod
    def run_sequential(state, spec):
        nbody.run_sequential(state, spec.timesteps)

    output = staticmethod(nbody.output)


BENCHMARKS = {
    "matmul": _MatmulBench,
    "sparselu": _SparseLUBench,
    "nbody": _NBodyBench,
}


def dry_run_count(spec: BenchSpec) -> int:
    """Number of tasks the generator would create, without executing."""
    return BENCHMARKS[spec.benchmark].count(spec)


def reference_output(spec: BenchSpec):
    bench = BENCHMARKS[spec.benchmark]
    state = bench.make(spec)
    bench.run_sequential(state, spec)
    return bench.output(state)


def run(spec: BenchSpec) -> Report:
    """Execute the benchmark described by ``spec``; report timings and counters."""
    bench = BENCHMARKS[spec.benchmark]
    count = bench.count(spec)
    if spec.dry_run:
        return Report(spec, [], count)

    reference = [arr.tobytes() for arr in reference_output(spec)]
    times: list[int] = []
    counters: dict = {}
    for rep in range(spec.repetitions):
        state = bench.make(spec)
        rt = Runtime(
            num_threads=spec.threads,
            mode=spec.mode,
            ddast_config=spec.ddast_config(),
            enable_instrumentation=spec.trace is not None,
        )
        rt.start()
        t0 = time.perf_counter_ns()
        bench.spawn(rt, state, spec)
        rt.taskwait()
        t1 = time.perf_counter_ns()
        stats = rt.shutdown()
        got = bench.output(state)
        if len(got) != len(reference) or any(
            arr.tobytes() != ref for arr, ref in zip(got, reference)
        ):
            raise VerificationFailedError(
                f"{spec.benchmark} output differs from the sequential reference "
                f"(mode={spec.mode.value}, threads={spec.threads}, rep={rep})"
            )
        if stats.created != count:
            raise VerificationFailedError(
                f"{spec.benchmark} created {stats.created} tasks, expected {count}"
            )
        times.append(t1 - t0)
        counters = stats.as_dict()
        if spec.trace is not None and rep == spec.repetitions - 1:
            rt.flush_trace(spec.trace)
    return Report(spec, times, count, counters)


@dataclass
class SweepRow:
    param: str
    value: int
    best_ns: int
    speedup: float


def sweep(spec: BenchSpec, param: str) -> list[SweepRow]:
    """Re-run the benchmark doubling one DDAST parameter from 1 to 128.

    Speedup is default-time / value-time; the row whose value equals the
    parameter's default reuses the default measurement, so its speedup is
    exactly 1.0.
    """
    param = param.replace("-", "_")
    if param not in SWEEP_PARAMS:
        raise BadArgsError(f"unknown sweep parameter {param!r}")
    if spec.mode is not RuntimeMode.DDAST:
        raise BadArgsError("sweep requires --mode ddast")

    default_value = getattr(default_config(spec.threads), param)
    base_spec = _with_param(spec, param, None)
    default_best = run(base_spec).best_ns
    rows = []
    for value in SWEEP_VALUES:
        if value == default_value:
            best = default_best
        else:
            best = run(_with_param(spec, param, value)).best_ns
        rows.append(SweepRow(param, value, best, default_best / best))
    return rows


def _with_param(spec: BenchSpec, param: str, value: Optional[int]) -> BenchSpec:
    return dataclasses.replace(spec, **{param: value})


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SWEEP_CSV_HEADER.split(","))
    for row in rows:
        writer.writerow([row.param, row.value, row.best_ns, f"{row.speedup:.6f}"])
    return buf.getvalue()
