"""Per-parent dependence graph: predecessor discovery and successor release.

Each parent task owns one :class:`TaskGraph` that orders its direct children
(sibling tasks only). Registration walks the children's clauses against
per-token last-writer/reader records, producing RAW, WAR, and WAW edges;
release purges the finished task and reports which successors became ready.
"""

from __future__ import annotations

import threading
from typing import Optional

from .task_model import (
    DependenceClause,
    Direction,
    TaskDescriptor,
    TaskEvent,
    TaskState,
    transition,
)


def conflict(a: DependenceClause, b: DependenceClause) -> bool:
    """True iff the two accesses must be ordered (same token, not both reads)."""
    return a.token == b.token and not (
        a.direction is Direction.IN and b.direction is Direction.IN
    )


class TokenEntry:
    """Live accessor record for one token: last writer plus readers since."""

    __slots__ = ("last_writer", "readers_since_write")

    def __init__(self):
        self.last_writer: Optional[TaskDescriptor] = None
        self.readers_since_write: set[TaskDescriptor] = set()

    def is_empty(self) -> bool:
        return self.last_writer is None and not self.readers_since_write


class TaskGraph:
    """Dependence graph over one parent's children.

    Mutation (``submit``/``release``) is mutually exclusive per graph: callers
    hold ``mutex`` around each call. In baseline mode any worker acquires it
    inline; in DDAST mode only manager threads do. ``in_graph_count`` may be
    read without the lock as a racy snapshot.
    """

    def __init__(self, owner: Optional[TaskDescriptor] = None):
        self.owner = owner
        self.mutex = threading.Lock()
        self.entries: dict[int, TokenEntry] = {}
        self.successors: dict[TaskDescriptor, list[TaskDescriptor]] = {}
        self.in_graph_count = 0

    def submit(self, task: TaskDescriptor) -> int:
        """Register a SUBMITTED task; returns its pending-predecessor count.

        A count of 0 means the task went straight to READY. Predecessors are
        de-duplicated per task: a predecessor reached through two tokens still
        contributes a single edge. Caller holds ``mutex``.
        """
        assert task.state is TaskState.SUBMITTED
        preds: set[TaskDescriptor] = set()
        for clause in task.clauses:
            entry = self.entries.get(clause.token)
            if entry is None:
                entry = TokenEntry()
                self.entries[clause.token] = entry
            if clause.direction is Direction.IN:
                if entry.last_writer is not None:
                    preds.add(entry.last_writer)  # RAW
                entry.readers_since_write.add(task)
            else:
                if entry.last_writer is not None:
                    preds.add(entry.last_writer)  # WAW (RAW too for INOUT)
                preds.update(entry.readers_since_write)  # WAR
                entry.last_writer = task
                entry.readers_since_write = set()

        task.pending_predecessors = len(preds)
        for pred in preds:
            self.successors.setdefault(pred, []).append(task)
        self.in_graph_count += 1
        transition(task, TaskEvent.ENTER_GRAPH)
        if not preds:
            transition(task, TaskEvent.BECOME_READY)
        return len(preds)

    def release(self, task: TaskDescriptor) -> list[TaskDescriptor]:
        """Purge a FINISHED task and return the successors that became ready.

        The task is removed from every token role, each successor's pending
        count drops once per edge, and the task transitions to RELEASED.
        Caller holds ``mutex``.
        """
        assert task.state is TaskState.FINISHED
        for clause in task.clauses:
            entry = self.entries.get(clause.token)
            if entry is None:
                continue
            if entry.last_writer is task:
                entry.last_writer = None
            entry.readers_since_write.discard(task)
            if entry.is_empty():
                del self.entries[clause.token]

        newly_ready: list[TaskDescriptor] = []
        for succ in self.successors.pop(task, ()):
            succ.pending_predecessors -= 1
            assert succ.pending_predecessors >= 0
            if succ.pending_predecessors == 0:
                transition(succ, TaskEvent.BECOME_READY)
                newly_ready.append(succ)
        transition(task, TaskEvent.RELEASE)
        self.in_graph_count -= 1
        return newly_ready
