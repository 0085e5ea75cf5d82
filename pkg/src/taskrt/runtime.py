"""Thread pool, distributed ready pool with stealing, and the task API.

One :class:`Runtime` instance owns ``num_threads`` execution contexts: the
calling (main) thread plus ``num_threads - 1`` pool workers. Tasks are
spawned with dependence clauses and executed exactly once. Two modes decide
who mutates the dependence graphs:

* BASELINE: the spawning/finishing thread mutates the graph inline under the
  graph's mutual-exclusion lock.
* DDAST: threads post requests to their own mailbox; idle threads drain the
  mailboxes as temporary managers through the dispatcher callback.
"""

from __future__ import annotations

import enum
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from . import instrument as ins
from .ddast import DdastConfig, DdastManager, default_config
from .dep_graph import TaskGraph
from .dispatcher import Dispatcher
from .mailbox import DoneTaskMessage, Mailbox, SubmitTaskMessage
from .task_model import (
    DependenceClause,
    TaskDescriptor,
    TaskEvent,
    TaskState,
    add_child,
    detach_child,
    transition,
    try_delete,
)


class RuntimeMode(enum.Enum):
    BASELINE = "baseline"
    DDAST = "ddast"


class RuntimeNotStartedError(RuntimeError):
    pass


class LeakedTasksError(RuntimeError):
    """Raised by shutdown when created/executed/deleted counts disagree."""

    def __init__(self, stats: "RunStats"):
        super().__init__(
            f"task leak: created={stats.created} executed={stats.executed} "
            f"deleted={stats.deleted}"
        )
        self.stats = stats


@dataclass
class RunStats:
    created: int
    executed: int
    deleted: int
    ready_remaining: int
    mailbox_remaining: int

    def as_dict(self) -> dict:
        return {
            "created": self.created,
            "executed": self.executed,
            "deleted": self.deleted,
            "ready_remaining": self.ready_remaining,
            "mailbox_remaining": self.mailbox_remaining,
        }


class ReadyPool:
    """Per-thread deques of READY tasks with round-robin stealing.

    The owner pushes at the right end and pops at the left; thieves take one
    task from the right end, scanning victims from their own id + 1.
    """

    def __init__(self, num_threads: int, instr: ins.Instrumentation):
        self.deques: list[deque] = [deque() for _ in range(num_threads)]
        self.instr = instr

    def push(self, task: TaskDescriptor, thread_id: int) -> None:
        self.deques[thread_id].append(task)
        self.instr.counter_delta(ins.READY, +1, thread_id)

    def pop_local(self, thread_id: int) -> Optional[TaskDescriptor]:
        try:
            task = self.deques[thread_id].popleft()
        except IndexError:
            return None
        self.instr.counter_delta(ins.READY, -1, thread_id)
        return task

    def steal(self, thread_id: int) -> Optional[TaskDescriptor]:
        n = len(self.deques)
        for off in range(1, n):
            try:
                task = self.deques[(thread_id + off) % n].pop()
            except IndexError:
                continue
            self.instr.counter_delta(ins.READY, -1, thread_id)
            return task
        return None

    def count(self) -> int:
        return sum(len(dq) for dq in self.deques)


class WorkerContext:
    """Per-thread runtime state: id, task stack, and local tallies."""

    __slots__ = ("id", "seq", "created", "executed", "deleted", "task_stack")

    def __init__(self, thread_id: int):
        self.id = thread_id
        self.seq = 0
        self.created = 0
        self.executed = 0
        self.deleted = 0
        self.task_stack: list[TaskDescriptor] = []


class Runtime:
    """A task runtime instance; also usable as a context manager.

    ``num_threads`` counts the calling thread, which executes tasks whenever
    it waits in :meth:`taskwait`. ``with Runtime(...) as rt`` starts the pool
    and, on exit, performs a final taskwait followed by :meth:`shutdown`.
    """

    _IDLE_SLEEP_S = 5e-5  # brief pause between failed acquire rounds

    def __init__(
        self,
        num_threads: int = 4,
        mode: RuntimeMode = RuntimeMode.BASELINE,
        ddast_config: Optional[DdastConfig] = None,
        enable_instrumentation: bool = False,
        record_transition_times: bool = False,
    ):
        if num_threads < 1:
            raise ValueError("num_threads must be >= 1")
        if isinstance(mode, str):
            mode = RuntimeMode(mode)
        self.num_threads = num_threads
        self.mode = mode
        self.ddast_cfg = ddast_config or default_config(num_threads)
        self.instr = ins.Instrumentation(enable_instrumentation)
        self.record_transition_times = record_transition_times

        self._started = False
        self._stop = threading.Event()
        self._failure: Optional[BaseException] = None
        self._tls = threading.local()
        self._threads: list[threading.Thread] = []
        self.stats: Optional[RunStats] = None

        self.contexts = [WorkerContext(i) for i in range(num_threads)]
        self.mailboxes = [Mailbox(i) for i in range(num_threads)]
        self.ready_pool = ReadyPool(num_threads, self.instr)
        self.dispatcher = Dispatcher()
        self.root = TaskDescriptor(0, None, (), None, label="main")
        self.root.state = TaskState.RUNNING
        self._graphs: dict[int, TaskGraph] = {0: TaskGraph(self.root)}
        self._graphs_lock = threading.Lock()

        self.manager: Optional[DdastManager] = None
        if mode is RuntimeMode.DDAST:
            self.manager = DdastManager(self.ddast_cfg, self)
            self.dispatcher.register_callback("ddast", self.manager.callback)

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> "Runtime":
        if self._started:
            return self
        if self._stop.is_set():
            raise RuntimeError("Runtime instances are single-use; create a new one")
        self.instr.start_clock()
        self._tls.ctx = self.contexts[0]
        barrier = threading.Barrier(self.num_threads)
        for ctx in self.contexts[1:]:
            t = threading.Thread(
                target=self._worker_main,
                args=(ctx, barrier),
                name=f"taskrt-worker-{ctx.id}",
                daemon=True,
            )
            self._threads.append(t)
            t.start()
        barrier.wait()
        self._started = True
        return self

    def shutdown(self) -> RunStats:
        """Stop the pool and return run counters.

        Call from the main thread after a final taskwait. Raises
        :class:`LeakedTasksError` when the life-cycle counters disagree,
        which signals tasks stranded somewhere in the system.
        """
        self._require_started()
        self._stop.set()
        for t in self._threads:
            t.join()
        self._started = False
        if self._failure is not None:
            raise self._failure
        stats = RunStats(
            created=sum(c.created for c in self.contexts),
            executed=sum(c.executed for c in self.contexts),
            deleted=sum(c.deleted for c in self.contexts),
            ready_remaining=self.ready_pool.count(),
            mailbox_remaining=sum(
                mb.submit_pending() + mb.done_pending() for mb in self.mailboxes
            ),
        )
        self.stats = stats
        if not (stats.created == stats.executed == stats.deleted):
            raise LeakedTasksError(stats)
        return stats

    def flush_trace(self, path) -> None:
        """Write the instrumentation trace CSV. Requires a quiescent runtime."""
        self.instr.flush_trace(path)

    def __enter__(self) -> "Runtime":
        return self.start()

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.taskwait()
            self.shutdown()
        else:
            self._stop.set()
            for t in self._threads:
                t.join()
            self._started = False

    # -- public task API ----------------------------------------------------

    def spawn(
        self,
        body: Optional[Callable[[], None]],
        clauses: Iterable[DependenceClause] = (),
        label: str = "task",
    ) -> TaskDescriptor:
        """Create and submit a task; the caller's current task is its parent.

        In baseline mode the caller registers the task in the dependence
        graph inline; in DDAST mode it posts a submit request to its own
        mailbox and returns immediately.
        """
        ctx = self._require_ctx()
        parent = ctx.task_stack[-1] if ctx.task_stack else self.root
        ctx.seq += 1
        task = TaskDescriptor(
            (ctx.id << 40) | ctx.seq,
            body,
            clauses,
            parent,
            label=label,
            record_times=self.record_transition_times,
        )
        task.creator_id = ctx.id
        task.creation_seq = ctx.seq
        task.graph = self._graph_of(parent)
        add_child(parent)
        ctx.created += 1
        self.instr.counter_delta(ins.CREATED, +1, ctx.id)
        transition(task, TaskEvent.SUBMIT)
        if self.mode is RuntimeMode.BASELINE:
            self.submit_task(task, ctx)
        else:
            self.mailboxes[ctx.id].post_submit(SubmitTaskMessage(task, task.creation_seq))
        return task

    def taskwait(self) -> None:
        """Block until every direct child of the caller's task completed.

        The calling thread keeps working while it waits: it pops local ready
        tasks, steals, and in DDAST mode runs the dispatcher callbacks.
        """
        ctx = self._require_ctx()
        waiter = ctx.task_stack[-1] if ctx.task_stack else self.root
        if waiter.live_children == 0:
            return
        transition(waiter, TaskEvent.BLOCK)
        try:
            while waiter.live_children > 0:
                if self._failure is not None:
                    raise self._failure
                if not self._work_once(ctx):
                    time.sleep(self._IDLE_SLEEP_S)
        finally:
            transition(waiter, TaskEvent.UNBLOCK)

    def ready_count(self) -> int:
        return self.ready_pool.count()

    # -- request handlers (both modes; DDAST calls them from managers) ------

    def submit_task(self, task: TaskDescriptor, ctx: WorkerContext) -> int:
        """Register a task in its graph; schedule it if it has no predecessors."""
        graph = task.graph
        with graph.mutex:
            pending = graph.submit(task)
        self.instr.counter_delta(ins.IN_GRAPH, +1, ctx.id)
        if pending == 0:
            self.ready_pool.push(task, ctx.id)
        return pending

    def release_task(self, task: TaskDescriptor, ctx: WorkerContext) -> None:
        """Release a finished task, schedule its newly ready successors, and
        attempt descriptor deletion."""
        graph = task.graph
        with graph.mutex:
            newly_ready = graph.release(task)
        self.instr.counter_delta(ins.IN_GRAPH, -1, ctx.id)
        for succ in newly_ready:
            self.ready_pool.push(succ, ctx.id)
        self._reap(task, ctx)

    # -- internals ----------------------------------------------------------

    def _graph_of(self, parent: TaskDescriptor) -> TaskGraph:
        graph = self._graphs.get(parent.id)
        if graph is None:
            # Only the thread running `parent` creates its graph, but two
            # runtimes of lookups may race with other parents' inserts.
            with self._graphs_lock:
                graph = self._graphs.get(parent.id)
                if graph is None:
                    graph = TaskGraph(parent)
                    self._graphs[parent.id] = graph
        return graph

    def _require_started(self) -> None:
        if not self._started:
            raise RuntimeNotStartedError("runtime is not started")

    def _require_ctx(self) -> WorkerContext:
        ctx = getattr(self._tls, "ctx", None)
        if ctx is None or not self._started:
            raise RuntimeNotStartedError(
                "spawn/taskwait must run on the main thread or inside a task"
            )
        return ctx

    def _worker_main(self, ctx: WorkerContext, barrier: threading.Barrier) -> None:
        self._tls.ctx = ctx
        barrier.wait()
        self.instr.thread_state(ctx.id, "IDLE", ins.STATE_IDLE)
        while not self._stop.is_set():
            if not self._work_once(ctx):
                time.sleep(self._IDLE_SLEEP_S)

    def _work_once(self, ctx: WorkerContext) -> bool:
        """One worker-loop step: run a task if any, else go through the idle
        path. Returns False when the caller should pause briefly."""
        task = self.ready_pool.pop_local(ctx.id) or self.ready_pool.steal(ctx.id)
        if task is not None:
            self._execute(task, ctx)
            return True
        if self.mode is RuntimeMode.DDAST:
            self.dispatcher.notify_idle(ctx)
            return self.ready_pool.count() > 0
        return False

    def _execute(self, task: TaskDescriptor, ctx: WorkerContext) -> None:
        transition(task, TaskEvent.START)
        self.instr.thread_state(ctx.id, task.label, ins.STATE_RUNNING)
        ctx.task_stack.append(task)
        try:
            if task.body is not None:
                task.body()
        except BaseException as exc:  # fail fast: surface on the main thread
            self._failure = exc
            self._stop.set()
            ctx.task_stack.pop()
            self.instr.thread_state(ctx.id, "IDLE", ins.STATE_IDLE)
            return
        ctx.task_stack.pop()
        transition(task, TaskEvent.FINISH)
        ctx.executed += 1
        self.instr.counter_delta(ins.EXECUTED, +1, ctx.id)
        if self.mode is RuntimeMode.BASELINE:
            self.release_task(task, ctx)
        else:
            self.mailboxes[ctx.id].post_done(DoneTaskMessage(task))
        self.instr.thread_state(ctx.id, "IDLE", ins.STATE_IDLE)

    def _reap(self, task: TaskDescriptor, ctx: WorkerContext) -> None:
        """Delete the descriptor if it lost all references, walking up the
        parent chain as detachments cascade."""
        while try_delete(task):
            ctx.deleted += 1
            self.instr.counter_delta(ins.DELETED, +1, ctx.id)
            self._graphs.pop(task.id, None)
            parent = task.parent
            if parent is None:
                break
            detach_child(parent)
            if parent.state not in (TaskState.FINISHED, TaskState.RELEASED):
                break
            task = parent
