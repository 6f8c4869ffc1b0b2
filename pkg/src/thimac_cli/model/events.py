"""Dynamic-level vocabulary: regions, events over regions and negation references."""

from __future__ import annotations

import heapq
import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import EventDefinitionError, Rule, SourceSpan, UnknownEventError
from .expressions import Assignment, Expr, effect_reads, variables
from .static import ActionKind, ArcKind, StaticModel

logger = logging.getLogger(__name__)


class EventStatus(str, Enum):
    SUBSISTING = "Subsisting"
    ACTUALIZED = "Actualized"


@dataclass(frozen=True)
class Region:
    """A connected sub-graph of a static model: where an event occurs."""

    actions: frozenset[str]
    arcs: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Event:
    id: str
    label: str
    region: Region
    guard: Expr | None = None
    effects: tuple[Assignment, ...] = ()
    external: bool = False
    note: str | None = None
    status: EventStatus = EventStatus.SUBSISTING
    time: int | None = None
    span: SourceSpan | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if (self.status is EventStatus.SUBSISTING) != (self.time is None):
            raise ValueError(f"event {self.id}: a subsisting event has no time and an actualized one needs it")

    def actualized_at(self, step: int) -> Event:
        return replace(self, status=EventStatus.ACTUALIZED, time=step)

    def subsisting(self) -> Event:
        return replace(self, status=EventStatus.SUBSISTING, time=None)


@dataclass(frozen=True)
class NegativeEventRef:
    """Target of a revert (negative) edge."""

    target: str


def define_event(
    model: StaticModel,
    event_id: str,
    label: str,
    refs: Iterable[str],
    *,
    arcs: Iterable[str] | None = None,
    guard: Expr | None = None,
    effects: Sequence[Assignment] = (),
    external: bool = False,
    note: str | None = None,
    span: SourceSpan | None = None,
) -> Event:
    """Define a subsisting event over a region of ``model``.

    ``refs`` are action references (``Shop.process.order`` or ``Shop.process``).
    When ``arcs`` is omitted the region takes every model arc between its actions.
    """
    refs = list(refs)
    if not refs:
        raise EventDefinitionError(Rule.EMPTY_REGION, f"event {event_id} has an empty region", event_id)

    actions: set[str] = set()
    for ref in refs:
        resolved = model.resolve(ref)
        if resolved is None:
            raise EventDefinitionError(Rule.UNKNOWN_ID, f"event {event_id} refers to unknown action '{ref}'", event_id)
        actions.add(resolved)

    if arcs is None:
        region_arcs = {a.id for a in model.arcs if a.source in actions and a.target in actions}
    else:
        region_arcs = set()
        for aid in arcs:
            arc = model.arc_index.get(aid)
            if arc is None:
                raise EventDefinitionError(Rule.UNKNOWN_ID, f"event {event_id} refers to unknown arc '{aid}'", event_id)
            if arc.source not in actions or arc.target not in actions:
                raise EventDefinitionError(
                    Rule.DISCONNECTED_REGION, f"arc '{aid}' of event {event_id} leaves its region", event_id
                )
            region_arcs.add(aid)

    if not _connected(model, actions, region_arcs):
        raise EventDefinitionError(
            Rule.DISCONNECTED_REGION,
            f"region of event {event_id} is not connected: {', '.join(sorted(actions))}",
            event_id,
        )

    declared = model.variable_types
    used = variables(guard) | effect_reads(effects) | {e.target for e in effects}
    undeclared = sorted(used - declared.keys())
    if undeclared:
        raise EventDefinitionError(
            Rule.UNDECLARED_VARIABLE, f"event {event_id} uses undeclared variable(s) {', '.join(undeclared)}", event_id
        )

    return Event(
        id=event_id,
        label=label,
        region=Region(frozenset(actions), frozenset(region_arcs)),
        guard=guard,
        effects=tuple(effects),
        external=external,
        note=note,
        span=span,
    )


def _connected(model: StaticModel, actions: set[str], arc_ids: set[str]) -> bool:
    neighbours: dict[str, set[str]] = defaultdict(set)
    for aid in arc_ids:
        arc = model.arc_index[aid]
        neighbours[arc.source].add(arc.target)
        neighbours[arc.target].add(arc.source)
    start = next(iter(actions))
    seen = {start}
    stack = [start]
    while stack:
        for nxt in neighbours[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen == actions


def created_entities(model: StaticModel, event: Event) -> list[str]:
    """Entity labels brought into existence by the create actions of an event's region."""
    return sorted({model.action_index[a].entity for a in event.region.actions if model.action_index[a].kind is ActionKind.CREATE})


def decompose_generic(model: StaticModel) -> list[Event]:
    """One single-action event per action, in topological flow order.

    Ties are broken by declaration order; a flow cycle is entered at its
    earliest-declared action.
    """
    position = {a.id: i for i, a in enumerate(model.actions)}
    indegree = dict.fromkeys(position, 0)
    successors: dict[str, list[str]] = defaultdict(list)
    for arc in model.arcs:
        if arc.kind is ArcKind.FLOW and arc.source in position and arc.target in position:
            successors[arc.source].append(arc.target)
            indegree[arc.target] += 1

    ready = [position[a] for a, degree in indegree.items() if degree == 0]
    heapq.heapify(ready)
    done: set[str] = set()
    order: list[str] = []
    while len(order) < len(position):
        if not ready:
            stuck = min(position[a] for a in position if a not in done)
            heapq.heappush(ready, stuck)
            indegree[model.actions[stuck].id] = 0
        current = model.actions[heapq.heappop(ready)].id
        if current in done:
            continue
        done.add(current)
        order.append(current)
        for nxt in successors[current]:
            if nxt in done:
                continue
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, position[nxt])

    events = []
    for number, aid in enumerate(order, start=1):
        action = model.action_index[aid]
        events.append(Event(id=f"E{number}", label=f"{action.kind.keyword} {action.entity}", region=Region(frozenset({aid}))))
    logger.debug("Decomposed %d generic event(s)", len(events))
    return events


def negate(events: Mapping[str, Event] | Iterable[Event], event_id: str) -> NegativeEventRef:
    """Reference to ``event_id`` usable as the target of a revert edge. No state changes."""
    known = events.keys() if isinstance(events, Mapping) else {e.id for e in events}
    if event_id not in known:
        raise UnknownEventError(event_id)
    return NegativeEventRef(event_id)
