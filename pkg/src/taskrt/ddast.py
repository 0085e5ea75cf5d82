"""Distributed manager callback: idle workers drain runtime-request queues.

Admission is bounded by a gauge so at most ``max_ddast_threads`` threads run
the callback at once. An admitted manager sweeps the worker mailboxes
round-robin, taking submit requests before done requests and at most
``max_ops_thread`` messages per mailbox visit, until enough ready tasks exist
or it spins ``max_spins`` times without finding any message.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from . import instrument as ins
from .mailbox import Mailbox


@dataclass(frozen=True)
class DdastConfig:
    """The four callback limits. Immutable after runtime start."""

    max_ddast_threads: int
    max_spins: int
    max_ops_thread: int
    min_ready_tasks: int

    def __post_init__(self):
        if self.max_ddast_threads < 1 or self.max_spins < 1 or self.max_ops_thread < 1:
            raise ValueError("max_ddast_threads, max_spins, max_ops_thread must be >= 1")
        if self.min_ready_tasks < 0:
            raise ValueError("min_ready_tasks must be >= 0")

    def replace(self, **kwargs) -> "DdastConfig":
        fields = {
            "max_ddast_threads": self.max_ddast_threads,
            "max_spins": self.max_spins,
            "max_ops_thread": self.max_ops_thread,
            "min_ready_tasks": self.min_ready_tasks,
        }
        fields.update(kwargs)
        return DdastConfig(**fields)


def default_config(num_threads: int) -> DdastConfig:
    """Tuned defaults, scaled to the thread count."""
    if num_threads < 1:
        raise ValueError("num_threads must be >= 1")
    return DdastConfig(
        max_ddast_threads=math.ceil(num_threads / 8),
        max_spins=1,
        max_ops_thread=8,
        min_ready_tasks=4,
    )


class ManagerGauge:
    """Counts threads currently inside the callback, capped."""

    def __init__(self, cap: int, instr: ins.Instrumentation):
        self.cap = cap
        self.instr = instr
        self._lock = threading.Lock()
        self.active = 0

    def try_enter(self, thread_id: int) -> bool:
        with self._lock:
            if self.active >= self.cap:
                return False
            self.active += 1
            assert 0 < self.active <= self.cap
            self.instr.counter_delta(ins.ACTIVE_MANAGERS, +1, thread_id)
        return True

    def exit(self, thread_id: int) -> None:
        with self._lock:
            self.active -= 1
            assert self.active >= 0
            self.instr.counter_delta(ins.ACTIVE_MANAGERS, -1, thread_id)


class DdastManager:
    """The callback registered in the dispatcher for asynchronous mode.

    ``runtime`` supplies the mailboxes, the ready-task count, and the two
    request handlers (graph submit and graph release); see
    :class:`taskrt.runtime.Runtime`.
    """

    def __init__(self, cfg: DdastConfig, runtime):
        self.cfg = cfg
        self.runtime = runtime
        self.gauge = ManagerGauge(cfg.max_ddast_threads, runtime.instr)

    def callback(self, ctx) -> None:
        cfg = self.cfg
        rt = self.runtime
        if not self.gauge.try_enter(ctx.id):
            return
        rt.instr.thread_state(ctx.id, "MANAGER", ins.STATE_MANAGER)
        try:
            mailboxes = rt.mailboxes
            n = len(mailboxes)
            spins = 0
            while rt.ready_count() < cfg.min_ready_tasks:
                processed = 0
                satisfied = False
                for off in range(n):
                    processed += self._visit(mailboxes[(ctx.id + 1 + off) % n], ctx)
                    if rt.ready_count() >= cfg.min_ready_tasks:
                        satisfied = True
                        break
                if satisfied:
                    break
                if processed == 0:
                    spins += 1
                    if spins >= cfg.max_spins:
                        break
                else:
                    spins = 0
        finally:
            self.gauge.exit(ctx.id)
            rt.instr.thread_state(ctx.id, "IDLE", ins.STATE_IDLE)

    def _visit(self, mailbox: Mailbox, ctx) -> int:
        """Process up to max_ops_thread messages from one mailbox.

        Submit requests go first and need the mailbox's lease; done requests
        are only taken once no unprocessed submit is visible there.
        """
        cfg = self.cfg
        rt = self.runtime
        ops = 0
        lease = mailbox.try_lease_submit()
        if lease is not None:
            try:
                while ops < cfg.max_ops_thread:
                    msg = lease.pop()
                    if msg is None:
                        break
                    self.process_submit(msg, ctx)
                    ops += 1
                    if rt.ready_count() >= cfg.min_ready_tasks:
                        return ops
            finally:
                lease.release()
        while ops < cfg.max_ops_thread and mailbox.submit_pending() == 0:
            msg = mailbox.pop_done()
            if msg is None:
                break
            self.process_done(msg, ctx)
            ops += 1
            if rt.ready_count() >= cfg.min_ready_tasks:
                break
        return ops

    def process_submit(self, msg, ctx) -> None:
        """Insert the task into its graph; schedule it if it came out ready."""
        self.runtime.submit_task(msg.task, ctx)

    def process_done(self, msg, ctx) -> None:
        """Release the finished task, schedule new ready tasks, reap it."""
        self.runtime.release_task(msg.task, ctx)
