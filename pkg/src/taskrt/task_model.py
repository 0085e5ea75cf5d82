"""Task descriptors, dependence clauses, and the task life-cycle state machine."""

from __future__ import annotations

import enum
import threading
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional


class Direction(enum.Enum):
    IN = "in"
    OUT = "out"
    INOUT = "inout"


@dataclass(frozen=True)
class DependenceClause:
    """Declared access to one datum: (token, direction).

    The token is an opaque identifier for the datum; :func:`token_of` derives
    one from an object's identity. Tokens must stay stable for the task's
    lifetime.
    """

    token: int
    direction: Direction


def token_of(obj: object) -> int:
    """Opaque datum identifier derived from the object's identity."""
    return id(obj)


def clause_in(obj: object) -> DependenceClause:
    return DependenceClause(token_of(obj), Direction.IN)


def clause_out(obj: object) -> DependenceClause:
    return DependenceClause(token_of(obj), Direction.OUT)


def clause_inout(obj: object) -> DependenceClause:
    return DependenceClause(token_of(obj), Direction.INOUT)


def merge_clauses(clauses: Iterable[DependenceClause]) -> list[DependenceClause]:
    """Canonicalize a clause list to at most one clause per token.

    Duplicate tokens merge to the join of their directions (anything mixed
    with a write becomes INOUT, IN+IN stays IN). First-occurrence order is
    preserved.
    """
    merged: dict[int, Direction] = {}
    for clause in clauses:
        prev = merged.get(clause.token)
        if prev is None:
            merged[clause.token] = clause.direction
        elif prev is not clause.direction:
            merged[clause.token] = Direction.INOUT
    return [DependenceClause(token, direction) for token, direction in merged.items()]


class TaskState(enum.Enum):
    CREATED = "created"
    SUBMITTED = "submitted"
    IN_GRAPH = "in_graph"
    READY = "ready"
    RUNNING = "running"
    BLOCKED = "blocked"
    FINISHED = "finished"
    RELEASED = "released"
    DELETABLE = "deletable"


class TaskEvent(enum.Enum):
    SUBMIT = "submit"
    ENTER_GRAPH = "enter_graph"
    BECOME_READY = "become_ready"
    START = "start"
    BLOCK = "block"
    UNBLOCK = "unblock"
    FINISH = "finish"
    RELEASE = "release"
    LAST_CHILD_GONE = "last_child_gone"


# Legal life-cycle edges. BECOME_READY may follow ENTER_GRAPH immediately
# when a task has no predecessors.
_TRANSITIONS: dict[tuple[TaskState, TaskEvent], TaskState] = {
    (TaskState.CREATED, TaskEvent.SUBMIT): TaskState.SUBMITTED,
    (TaskState.SUBMITTED, TaskEvent.ENTER_GRAPH): TaskState.IN_GRAPH,
    (TaskState.IN_GRAPH, TaskEvent.BECOME_READY): TaskState.READY,
    (TaskState.READY, TaskEvent.START): TaskState.RUNNING,
    (TaskState.RUNNING, TaskEvent.BLOCK): TaskState.BLOCKED,
    (TaskState.BLOCKED, TaskEvent.UNBLOCK): TaskState.RUNNING,
    (TaskState.RUNNING, TaskEvent.FINISH): TaskState.FINISHED,
    (TaskState.FINISHED, TaskEvent.RELEASE): TaskState.RELEASED,
    (TaskState.RELEASED, TaskEvent.LAST_CHILD_GONE): TaskState.DELETABLE,
}


class IllegalTransitionError(RuntimeError):
    """An event was applied from a state that does not permit it."""

    def __init__(self, state: TaskState, event: TaskEvent):
        super().__init__(f"illegal task transition: {event.name} from {state.name}")
        self.state = state
        self.event = event


class TaskDescriptor:
    """Per-task record: clauses, life-cycle state, and parent/child links.

    ``state``, ``live_children``, and ``pending_predecessors`` are mutated
    with individually linearizable steps (under ``_lock`` or the owning
    graph's mutation lock); all other fields are immutable after submission.
    """

    __slots__ = (
        "id",
        "body",
        "clauses",
        "label",
        "state",
        "parent",
        "live_children",
        "pending_predecessors",
        "graph",
        "creator_id",
        "creation_seq",
        "times",
        "_lock",
    )

    def __init__(
        self,
        task_id: int,
        body: Optional[Callable[[], None]],
        clauses: Iterable[DependenceClause] = (),
        parent: Optional["TaskDescriptor"] = None,
        label: str = "task",
        record_times: bool = False,
    ):
        self.id = task_id
        self.body = body
        self.clauses = merge_clauses(clauses)
        self.label = label
        self.state = TaskState.CREATED
        self.parent = parent
        self.live_children = 0
        self.pending_predecessors = 0
        self.graph = None  # parent's TaskGraph; set when the runtime attaches it
        self.creator_id = -1
        self.creation_seq = -1
        self.times: Optional[dict[TaskEvent, int]] = {} if record_times else None
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"<Task {self.id} {self.label!r} {self.state.name}>"


def transition(task: TaskDescriptor, event: TaskEvent) -> TaskState:
    """Apply a life-cycle event in one linearizable step.

    Returns the new state, or raises :class:`IllegalTransitionError` when the
    event is not legal from the current state (a runtime logic bug).
    """
    with task._lock:
        new_state = _TRANSITIONS.get((task.state, event))
        if new_state is None:
            raise IllegalTransitionError(task.state, event)
        task.state = new_state
        if task.times is not None:
            task.times[event] = time.perf_counter_ns()
    return new_state


def try_delete(task: TaskDescriptor) -> bool:
    """Attempt to claim the task for deletion.

    Succeeds iff ``state == RELEASED and live_children == 0`` at one
    linearizable instant, flipping the state to DELETABLE. Exactly one caller
    ever receives True per task; the losers leave deletion to the winner (a
    finished task with live children is reclaimed later, when its last child
    detaches).
    """
    with task._lock:
        if task.state is TaskState.RELEASED and task.live_children == 0:
            task.state = TaskState.DELETABLE
            if task.times is not None:
                task.times[TaskEvent.LAST_CHILD_GONE] = time.perf_counter_ns()
            return True
    return False


def add_child(parent: TaskDescriptor) -> None:
    with parent._lock:
        parent.live_children += 1


def detach_child(parent: TaskDescriptor) -> None:
    """Drop one live child. Called when a child reaches DELETABLE."""
    with parent._lock:
        assert parent.live_children > 0
        parent.live_children -= 1
