"""Functionality dispatcher: runtime callbacks executed by idle workers.

Runtime services register callbacks here instead of owning dedicated
threads. A worker that finds no work (empty local deque and one failed
stealing round) notifies the dispatcher, which runs every enabled callback
inline on that thread, in registration order.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable


class DuplicateNameError(ValueError):
    pass


@dataclass
class CallbackRegistration:
    name: str
    entry: Callable[[object], None]
    enabled: bool = field(default=True)


class Dispatcher:
    def __init__(self):
        self._lock = threading.Lock()
        self._callbacks: list[CallbackRegistration] = []

    def register_callback(self, name: str, entry: Callable[[object], None]) -> None:
        """Register a named callback; permitted during init or execution."""
        with self._lock:
            if any(reg.name == name for reg in self._callbacks):
                raise DuplicateNameError(f"callback {name!r} already registered")
            # Copy-on-write so notify_idle readers see a consistent snapshot.
            self._callbacks = self._callbacks + [CallbackRegistration(name, entry)]

    def notify_idle(self, worker_ctx: object) -> None:
        """Run each enabled callback once, in registration order, inline."""
        for reg in self._callbacks:
            if reg.enabled:
                reg.entry(worker_ctx)

    def names(self) -> list[str]:
        return [reg.name for reg in self._callbacks]
