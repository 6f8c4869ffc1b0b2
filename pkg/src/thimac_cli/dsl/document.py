"""Parsed ``.tm`` documents before semantic checking."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..model.behavior import BehaviorEdge
from ..model.engine import Stimulus
from ..model.errors import SourceSpan
from ..model.expressions import Assignment, Expr, Value
from ..model.queue import QueueSpec
from ..model.static import ArcDecl, ThimacDecl, Variable
from ..model.timeline import Timeline


@dataclass(frozen=True)
class EventDecl:
    """An event as written: region references are kept verbatim until the model is built."""

    id: str
    refs: tuple[str, ...]
    label: str | None = None
    guard: Expr | None = None
    effects: tuple[Assignment, ...] = ()
    external: bool = False
    note: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ScenarioDecl:
    name: str
    bindings: tuple[tuple[str, Value], ...] = ()
    stimuli: tuple[Stimulus, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)

    def binding_map(self) -> dict[str, Value]:
        return dict(self.bindings)


@dataclass(frozen=True)
class Document:
    thimacs: tuple[ThimacDecl, ...] = ()
    arcs: tuple[ArcDecl, ...] = ()
    variables: tuple[Variable, ...] = ()
    events: tuple[EventDecl, ...] = ()
    edges: tuple[BehaviorEdge, ...] = ()
    queues: tuple[QueueSpec, ...] = ()
    timelines: tuple[Timeline, ...] = ()
    scenarios: tuple[ScenarioDecl, ...] = ()
    source: str = field(default="<string>", compare=False)

    def is_empty(self) -> bool:
        return not any(
            (self.thimacs, self.arcs, self.variables, self.events, self.edges, self.queues, self.timelines, self.scenarios)
        )
