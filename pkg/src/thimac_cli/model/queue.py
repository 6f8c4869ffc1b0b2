"""FIFO queue component feeding a downstream process.

A queue has no capacity limit. Each transition records the events bound to
the phases it passes through, each with the queue flags after its phase.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .errors import SourceSpan


class QueuePhase(str, Enum):
    ARRIVE = "arrive"
    FREE = "free"
    DEQUEUE = "dequeue"
    DRAIN = "drain"
    BUSY = "busy"


@dataclass(frozen=True)
class QueueSpec:
    """A declared queue and the event ids recorded for each phase of a transition."""

    name: str
    phases: tuple[tuple[QueuePhase, tuple[str, ...]], ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)

    def events_for(self, phase: QueuePhase) -> tuple[str, ...]:
        found: list[str] = []
        for declared, ids in self.phases:
            if declared is phase:
                found.extend(ids)
        return tuple(found)

    def event_ids(self) -> tuple[str, ...]:
        return tuple(eid for _, ids in self.phases for eid in ids)


@dataclass(frozen=True)
class Arrive:
    instance: str


@dataclass(frozen=True)
class DownstreamFree:
    pass


@dataclass(frozen=True)
class DownstreamBusy:
    pass


QueueSignal = Union[Arrive, DownstreamFree, DownstreamBusy]


@dataclass
class QueueComponent:
    name: str
    items: deque[str] = field(default_factory=deque)
    empty: bool = True
    busy: bool = False

    def apply(self, signal: QueueSignal) -> tuple[list[tuple[QueuePhase, dict[str, object]]], str | None]:
        """Apply one signal.

        Returns each phase passed through with the queue flags as they stand
        right after that phase, and the dequeued item, if any. The dequeue
        snapshot also names the item handed downstream.
        """
        if isinstance(signal, Arrive):
            self.items.append(signal.instance)
            self.empty = False
            return [(QueuePhase.ARRIVE, self.snapshot())], None
        if isinstance(signal, DownstreamBusy):
            self.busy = True
            return [(QueuePhase.BUSY, self.snapshot())], None

        self.busy = False
        passed = [(QueuePhase.FREE, self.snapshot())]
        if not self.items:
            return passed, None
        head = self.items.popleft()
        self.busy = True
        passed.append((QueuePhase.DEQUEUE, {**self.snapshot(), f"{self.name}.dequeued": head}))
        if not self.items:
            self.empty = True
            passed.append((QueuePhase.DRAIN, self.snapshot()))
        return passed, head

    def snapshot(self) -> dict[str, object]:
        return {
            f"{self.name}.length": len(self.items),
            f"{self.name}.empty": self.empty,
            f"{self.name}.busy": self.busy,
        }

    def consistent(self) -> bool:
        return self.empty == (not self.items)
