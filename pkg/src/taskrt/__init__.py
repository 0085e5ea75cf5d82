"""taskrt: a task-parallel runtime with synchronous and asynchronous
dependence management, plus benchmark workloads and a CLI."""

from .task_model import (
    DependenceClause,
    Direction,
    IllegalTransitionError,
    TaskDescriptor,
    TaskEvent,
    TaskState,
    clause_in,
    clause_inout,
    clause_out,
    merge_clauses,
    token_of,
    transition,
    try_delete,
)
from .dep_graph import TaskGraph, conflict
from .mailbox import DoneTaskMessage, Mailbox, SubmitTaskMessage
from .dispatcher import Dispatcher, DuplicateNameError
from .ddast import DdastConfig, DdastManager, default_config
from .runtime import (
    LeakedTasksError,
    RunStats,
    Runtime,
    RuntimeMode,
    RuntimeNotStartedError,
)

__all__ = [
    "DependenceClause",
    "Direction",
    "IllegalTransitionError",
    "TaskDescriptor",
    "TaskEvent",
    "TaskState",
    "clause_in",
    "clause_inout",
    "clause_out",
    "merge_clauses",
    "token_of",
    "transition",
    "try_delete",
    "TaskGraph",
    "conflict",
    "DoneTaskMessage",
    "Mailbox",
    "SubmitTaskMessage",
    "Dispatcher",
    "DuplicateNameError",
    "DdastConfig",
    "DdastManager",
    "default_config",
    "LeakedTasksError",
    "RunStats",
    "Runtime",
    "RuntimeMode",
    "RuntimeNotStartedError",
]

__version__ = "0.1.0"
