from __future__ import annotations

import threading

import pytest

from taskrt import Runtime, RuntimeMode, clause_inout
from taskrt.instrument import (
    ACTIVE_MANAGERS,
    CREATED,
    DELETED,
    EXECUTED,
    IN_GRAPH,
    KIND_COUNTER,
    KIND_THREAD_STATE,
    READY,
    STATE_IDLE,
    STATE_MANAGER,
    TRACE_HEADER,
    Instrumentation,
    counter_finals,
    counter_max,
    counter_series,
    read_trace,
    time_average,
)


class TestRecording:
    def test_balanced_stream_reconstructs_to_zero(self, tmp_path):
        ins = Instrumentation(enabled=True)
        for _ in range(10):
            ins.counter_delta(IN_GRAPH, +1, 0)
        for _ in range(10):
            ins.counter_delta(IN_GRAPH, -1, 0)
        path = tmp_path / "trace.csv"
        ins.flush_trace(path)
        rows = read_trace(path)
        series = counter_series(rows, IN_GRAPH)
        assert series[-1][1] == 0
        assert max(v for _, v in series) == 10

    def test_disabled_records_nothing(self):
        ins = Instrumentation(enabled=False)
        ins.counter_delta(READY, +1, 0)
        ins.thread_state(0, "IDLE", STATE_IDLE)
        assert ins.events() == []

    def test_consecutive_duplicate_states_dropped(self):
        ins = Instrumentation(enabled=True)
        ins.thread_state(0, "IDLE", STATE_IDLE)
        ins.thread_state(0, "IDLE", STATE_IDLE)
        ins.thread_state(0, "work", 1)
        ins.thread_state(0, "IDLE", STATE_IDLE)
        names = [ev[2] for ev in ins.events() if ev[1] == KIND_THREAD_STATE]
        assert names == ["IDLE", "work", "IDLE"]

    def test_timestamps_non_decreasing_per_thread(self):
        ins = Instrumentation(enabled=True)

        def emitter(tid):
            for i in range(200):
                ins.counter_delta(READY, +1 if i % 2 == 0 else -1, tid)

        threads = [threading.Thread(target=emitter, args=(t,)) for t in range(3)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        by_thread: dict[int, list[int]] = {}
        for ts, kind, name, tid, value in ins.events():
            by_thread.setdefault(tid, []).append(ts)
        for stamps in by_thread.values():
            assert stamps == sorted(stamps)


class TestFlush:
    def test_empty_trace_is_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        Instrumentation(enabled=True).flush_trace(path)
        assert path.read_text().strip() == TRACE_HEADER

    def test_rows_globally_sorted(self, tmp_path):
        ins = Instrumentation(enabled=True)

        def emitter():
            for _ in range(100):
                ins.counter_delta(READY, +1, 1)
                ins.counter_delta(READY, -1, 1)

        t = threading.Thread(target=emitter)
        t.start()
        t.join()
        for _ in range(50):
            ins.counter_delta(IN_GRAPH, +1, 0)
            ins.counter_delta(IN_GRAPH, -1, 0)
        path = tmp_path / "two.csv"
        ins.flush_trace(path)
        rows = read_trace(path)
        stamps = [row[0] for row in rows]
        assert stamps == sorted(stamps)

    def test_round_trip_finals_match_live_counters(self, tmp_path):
        with Runtime(num_threads=2, mode=RuntimeMode.DDAST, enable_instrumentation=True) as rt:
            token = object()
            for _ in range(25):
                rt.spawn(lambda: None, [clause_inout(token)])
            rt.taskwait()
        path = tmp_path / "run.csv"
        rt.flush_trace(path)
        finals = counter_finals(read_trace(path))
        assert finals[CREATED] == rt.stats.created == 25
        assert finals[EXECUTED] == rt.stats.executed == 25
        assert finals[DELETED] == rt.stats.deleted == 25
        assert finals[IN_GRAPH] == 0
        assert finals[READY] == 0
        assert finals.get(ACTIVE_MANAGERS, 0) == 0


class TestRuntimeTraceShape:
    @pytest.fixture()
    def traced_run(self, tmp_path):
        with Runtime(num_threads=4, mode=RuntimeMode.DDAST, enable_instrumentation=True) as rt:
            tokens = [object() for _ in range(4)]
            for i in range(60):
                rt.spawn(lambda: None, [clause_inout(tokens[i % 4])], label="stress")
            rt.taskwait()
        path = tmp_path / "traced.csv"
        rt.flush_trace(path)
        return read_trace(path)

    def test_manager_entries_are_bracketed(self, traced_run):
        per_thread: dict[int, list[tuple[str, int]]] = {}
        for ts, kind, name, tid, value in traced_run:
            if kind == KIND_THREAD_STATE:
                per_thread.setdefault(tid, []).append((name, value))
        manager_events = 0
        for stream in per_thread.values():
            for i, (name, value) in enumerate(stream):
                assert i == 0 or stream[i - 1] != (name, value)
                if value == STATE_MANAGER:
                    manager_events += 1
                    # every admission is eventually followed by a non-manager state
                    assert any(v != STATE_MANAGER for _, v in stream[i + 1 :])
        # with cap 1 the absolute series alternates 1,0,..., so rows at level 1
        # count the admissions exactly
        admissions = sum(
            1
            for ts, kind, name, tid, value in traced_run
            if kind == KIND_COUNTER and name == ACTIVE_MANAGERS and value == 1
        )
        assert manager_events > 0
        assert manager_events == admissions

    def test_active_managers_bounded_by_cap(self, traced_run):
        assert counter_max(traced_run, ACTIVE_MANAGERS) <= 1  # ceil(4/8)


class TestTimeAverage:
    def test_piecewise_constant_average(self):
        series = [(0, 0), (10, 2), (20, 2), (30, 0)]
        # levels: 0 over [0,10), 2 over [10,30), 0 afterwards
        assert time_average(series, t_end=40) == pytest.approx((2 * 20) / 40)

    def test_empty_series(self):
        assert time_average([]) == 0.0
