"""Low-overhead counters and event tracing, exported as CSV.

Each thread appends events to its own buffer; buffers are merged and sorted
only at flush, after the workers have joined, so tracing does not perturb the
contention behavior being measured. Counter events are recorded as +1/-1
deltas and written to the CSV as the reconstructed absolute series.
"""

from __future__ import annotations

import csv
import threading
import time
from typing import Iterable, Optional

# Counter names.
IN_GRAPH = "IN_GRAPH"
READY = "READY"
ACTIVE_MANAGERS = "ACTIVE_MANAGERS"
CREATED = "CREATED"
EXECUTED = "EXECUTED"
DELETED = "DELETED"

KIND_COUNTER = "COUNTER"
KIND_THREAD_STATE = "THREAD_STATE"

# Thread-state codes (the CSV value column for THREAD_STATE rows).
STATE_IDLE = 0
STATE_RUNNING = 1
STATE_MANAGER = 2

TRACE_HEADER = "timestamp_ns,kind,name,thread_id,value"


class Instrumentation:
    """Trace sink shared by one runtime instance.

    When disabled every recording call is a cheap no-op. Enabled recording
    appends (timestamp, kind, name, thread_id, value) tuples to a per-thread
    buffer; timestamps come from one monotone clock and are relative to
    :meth:`start_clock`.
    """

    def __init__(self, enabled: bool = False):
        self.enabled = enabled
        self._t0 = time.perf_counter_ns()
        self._lock = threading.Lock()
        self._buffers: list[list[tuple[int, str, str, int, int]]] = []
        self._tls = threading.local()

    def start_clock(self) -> None:
        self._t0 = time.perf_counter_ns()

    def now(self) -> int:
        return time.perf_counter_ns() - self._t0

    def _buffer(self) -> list:
        buf = getattr(self._tls, "buf", None)
        if buf is None:
            buf = []
            self._tls.buf = buf
            self._tls.last_state = None
            with self._lock:
                self._buffers.append(buf)
        return buf

    def counter_delta(self, name: str, delta: int, thread_id: int = -1) -> None:
        """Record one counter change (+1/-1) from the calling thread."""
        if not self.enabled:
            return
        self._buffer().append((self.now(), KIND_COUNTER, name, thread_id, delta))

    def thread_state(self, thread_id: int, name: str, code: int) -> None:
        """Record a thread-state change; consecutive duplicates are dropped."""
        if not self.enabled:
            return
        buf = self._buffer()
        if self._tls.last_state == (name, code):
            return
        self._tls.last_state = (name, code)
        buf.append((self.now(), KIND_THREAD_STATE, name, thread_id, code))

    def events(self) -> list[tuple[int, str, str, int, int]]:
        """Merged raw events, sorted by timestamp. Call at quiescence."""
        with self._lock:
            merged = [ev for buf in self._buffers for ev in buf]
        merged.sort(key=lambda ev: ev[0])
        return merged

    def flush_trace(self, path) -> None:
        """Write the merged trace as CSV, one row per event.

        Counter rows carry the absolute counter level after the event
        (deltas are accumulated per name during the merge); thread-state
        rows carry the state code.
        """
        levels: dict[str, int] = {}
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_HEADER.split(","))
            for ts, kind, name, thread_id, value in self.events():
                if kind == KIND_COUNTER:
                    levels[name] = levels.get(name, 0) + value
                    value = levels[name]
                writer.writerow([ts, kind, name, thread_id, value])


def read_trace(path) -> list[tuple[int, str, str, int, int]]:
    """Parse a flushed trace CSV back into event tuples."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != TRACE_HEADER:
            raise ValueError(f"unexpected trace header: {header}")
        for ts, kind, name, thread_id, value in reader:
            rows.append((int(ts), kind, name, int(thread_id), int(value)))
    return rows


def counter_series(
    rows: Iterable[tuple[int, str, str, int, int]], name: str
) -> list[tuple[int, int]]:
    """(timestamp, absolute level) points for one counter from a parsed trace."""
    return [(ts, value) for ts, kind, n, _tid, value in rows if kind == KIND_COUNTER and n == name]


def counter_finals(rows: Iterable[tuple[int, str, str, int, int]]) -> dict[str, int]:
    """Final absolute level per counter name."""
    finals: dict[str, int] = {}
    for ts, kind, name, _tid, value in rows:
        if kind == KIND_COUNTER:
            finals[name] = value
    return finals


def counter_max(rows: Iterable[tuple[int, str, str, int, int]], name: str) -> int:
    series = counter_series(rows, name)
    return max((v for _, v in series), default=0)


def time_average(series: list[tuple[int, int]], t_end: Optional[int] = None) -> float:
    """Time-weighted mean of a piecewise-constant counter series."""
    if not series:
        return 0.0
    if t_end is None:
        t_end = series[-1][0]
    total = 0.0
    prev_ts, prev_val = series[0]
    for ts, val in series[1:]:
        total += prev_val * (ts - prev_ts)
        prev_ts, prev_val = ts, val
    total += prev_val * max(t_end - prev_ts, 0)
    span = t_end - series[0][0]
    return total / span if span > 0 else float(series[-1][1])
