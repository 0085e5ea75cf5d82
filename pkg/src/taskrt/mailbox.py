"""Per-worker message queues carrying runtime-operation requests.

Each worker owns one mailbox with two unbounded queues: an order-preserving
submit queue (single producer, single leased consumer) and a done queue
(single producer, any number of concurrent consumers). Producers never block.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .task_model import TaskDescriptor


@dataclass(frozen=True)
class SubmitTaskMessage:
    """Request to insert a created task into its dependence graph."""

    task: TaskDescriptor
    creation_seq: int


@dataclass(frozen=True)
class DoneTaskMessage:
    """Request to release a finished task, notifying its successors."""

    task: TaskDescriptor


class SubmitLease:
    """Exclusive pop rights on one mailbox's submit queue.

    Popping through a released lease is a protocol violation and raises.
    """

    __slots__ = ("_mailbox", "_active")

    def __init__(self, mailbox: "Mailbox"):
        self._mailbox = mailbox
        self._active = True

    def pop(self) -> Optional[SubmitTaskMessage]:
        if not self._active:
            raise RuntimeError("pop through a released submit lease")
        try:
            return self._mailbox._submit_q.popleft()
        except IndexError:
            return None

    def release(self) -> None:
        if self._active:
            self._active = False
            self._mailbox._submit_flag.release()

    def __enter__(self) -> "SubmitLease":
        return self

    def __exit__(self, *exc) -> None:
        self.release()


class Mailbox:
    """One worker's pair of request queues plus the submit-queue lease."""

    def __init__(self, owner_id: int):
        self.owner_id = owner_id
        self._submit_q: deque[SubmitTaskMessage] = deque()
        self._done_q: deque[DoneTaskMessage] = deque()
        self._submit_flag = threading.Lock()

    def post_submit(self, msg: SubmitTaskMessage) -> None:
        """Append a submit request. Only the owning worker calls this."""
        self._submit_q.append(msg)

    def post_done(self, msg: DoneTaskMessage) -> None:
        """Append a done request. Only the owning worker calls this."""
        self._done_q.append(msg)

    def try_lease_submit(self) -> Optional[SubmitLease]:
        """Acquire exclusive submit-pop rights, or None when another thread
        holds them (BUSY; the caller moves on to the next mailbox)."""
        if self._submit_flag.acquire(blocking=False):
            return SubmitLease(self)
        return None

    def pop_done(self) -> Optional[DoneTaskMessage]:
        """Pop one done request; any thread, concurrently, any order."""
        try:
            return self._done_q.popleft()
        except IndexError:
            return None

    def submit_pending(self) -> int:
        return len(self._submit_q)

    def done_pending(self) -> int:
        return len(self._done_q)

    def is_empty(self) -> bool:
        return not self._submit_q and not self._done_q
