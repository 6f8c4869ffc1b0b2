"""Behavior graphs: events joined by guarded sequence edges and revert (negative) edges."""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING

from .errors import BehaviorError, EvaluationError, Rule, SourceSpan, Violation
from .events import Event
from .expressions import Expr, VarType, holds, infer_type, to_source, variables

if TYPE_CHECKING:
    from .engine import SimState
    from .static import StaticModel

logger = logging.getLogger(__name__)

# Values tried per variable when looking for two guards that can hold together.
SAMPLE_SIZE = 12
SAMPLE_LIMIT = 20_000


class EdgeKind(str, Enum):
    SEQUENCE = "sequence"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class BehaviorEdge:
    source: str
    target: str
    kind: EdgeKind = EdgeKind.SEQUENCE
    guard: Expr | None = None
    span: SourceSpan | None = field(default=None, compare=False)

    def __str__(self) -> str:
        if self.kind is EdgeKind.NEGATIVE:
            return f"{self.source} -> revert {self.target}"
        text = f"{self.source} -> {self.target}"
        return f"{text} guard {to_source(self.guard)}" if self.guard is not None else text


@dataclass(frozen=True)
class BehaviorGraph:
    model: StaticModel
    events: tuple[Event, ...]
    edges: tuple[BehaviorEdge, ...]
    initial: frozenset[str]
    warnings: tuple[Violation, ...] = field(default=(), compare=False)

    @cached_property
    def event_index(self) -> dict[str, Event]:
        return {e.id: e for e in self.events}

    @cached_property
    def position(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.events)}

    @cached_property
    def incoming(self) -> dict[str, tuple[BehaviorEdge, ...]]:
        grouped: dict[str, list[BehaviorEdge]] = defaultdict(list)
        for edge in self.edges:
            if edge.kind is EdgeKind.SEQUENCE:
                grouped[edge.target].append(edge)
        return {k: tuple(v) for k, v in grouped.items()}

    @cached_property
    def outgoing(self) -> dict[str, tuple[BehaviorEdge, ...]]:
        grouped: dict[str, list[BehaviorEdge]] = defaultdict(list)
        for edge in self.edges:
            if edge.kind is EdgeKind.SEQUENCE:
                grouped[edge.source].append(edge)
        return {k: tuple(v) for k, v in grouped.items()}

    @cached_property
    def reverts(self) -> dict[str, tuple[str, ...]]:
        grouped: dict[str, list[str]] = defaultdict(list)
        for edge in self.edges:
            if edge.kind is EdgeKind.NEGATIVE:
                grouped[edge.source].append(edge.target)
        return {k: tuple(v) for k, v in grouped.items()}

    @property
    def negative_edges(self) -> tuple[BehaviorEdge, ...]:
        return tuple(e for e in self.edges if e.kind is EdgeKind.NEGATIVE)

    def event(self, event_id: str) -> Event:
        return self.event_index[event_id]


def build_behavior(
    model: StaticModel,
    events: Iterable[Event],
    edges: Iterable[BehaviorEdge],
) -> BehaviorGraph:
    """Validate events and edges over ``model`` and compute the initial set.

    Raises BehaviorError with every error found. UnguardedBranch findings are
    warnings and end up in ``BehaviorGraph.warnings``.
    """
    events = tuple(events)
    edges = tuple(edges)
    violations: list[Violation] = []

    index: dict[str, Event] = {}
    for event in events:
        if event.id in index:
            violations.append(Violation(Rule.DUPLICATE_ID, f"event '{event.id}' is declared twice", event.id, event.span))
        index[event.id] = event

    for edge in edges:
        for end in (edge.source, edge.target):
            if end not in index:
                violations.append(Violation(Rule.UNKNOWN_EVENT, f"edge '{edge}' names unknown event '{end}'", end, edge.span))
        if edge.kind is EdgeKind.NEGATIVE and edge.guard is not None:
            violations.append(
                Violation(Rule.NEGATIVE_GUARD, f"revert edge '{edge.source} -> {edge.target}' cannot carry a guard", edge.source, edge.span)
            )

    types = model.variable_types
    for event in events:
        if event.guard is not None:
            violations.extend(_check_guard(event.guard, types, event.id, event.span))
        for effect in event.effects:
            violations.extend(_check_effect(effect.target, effect.expr, types, event.id, event.span))
    for edge in edges:
        if edge.guard is not None and edge.kind is EdgeKind.SEQUENCE:
            violations.extend(_check_guard(edge.guard, types, f"{edge.source}->{edge.target}", edge.span))

    known_edges = tuple(e for e in edges if e.source in index and e.target in index)
    violations.extend(_check_cycles(events, known_edges))

    if violations:
        logger.debug("build_behavior found %d violation(s)", len(violations))
        raise BehaviorError(violations)

    has_incoming = {e.target for e in known_edges if e.kind is EdgeKind.SEQUENCE}
    initial = frozenset(e.id for e in events if not e.external and e.id not in has_incoming)
    warnings = tuple(_branch_warnings(model, index, known_edges))
    logger.debug("Built behavior graph: %d event(s), %d edge(s), initial=%s", len(events), len(edges), sorted(initial))
    return BehaviorGraph(model=model, events=events, edges=known_edges, initial=initial, warnings=warnings)


def _check_guard(guard: Expr, types: Mapping[str, VarType], subject: str, span: SourceSpan | None) -> Iterator[Violation]:
    try:
        guard_type = infer_type(guard, types, rule=Rule.GUARD_TYPE_ERROR)
    except EvaluationError as exc:
        yield Violation(exc.rule, f"guard '{to_source(guard)}' of {subject}: {exc}", subject, span)
        return
    if guard_type is not VarType.BOOL:
        yield Violation(Rule.GUARD_TYPE_ERROR, f"guard '{to_source(guard)}' of {subject} is {guard_type.value}, not bool", subject, span)


def _check_effect(target: str, expr: Expr, types: Mapping[str, VarType], subject: str, span: SourceSpan | None) -> Iterator[Violation]:
    if target not in types:
        yield Violation(Rule.UNDECLARED_VARIABLE, f"effect of {subject} assigns undeclared variable '{target}'", subject, span)
        return
    try:
        value_type = infer_type(expr, types, rule=Rule.EFFECT_TYPE_ERROR)
    except EvaluationError as exc:
        yield Violation(exc.rule, f"effect '{target} := {to_source(expr)}' of {subject}: {exc}", subject, span)
        return
    if value_type is not types[target]:
        yield Violation(
            Rule.EFFECT_TYPE_ERROR,
            f"effect of {subject} assigns {value_type.value} to {types[target].value} variable '{target}'",
            subject,
            span,
        )


def _check_cycles(events: tuple[Event, ...], edges: tuple[BehaviorEdge, ...]) -> Iterator[Violation]:
    """A sequence cycle is legal only when one of its events can be reverted."""
    successors: dict[str, list[str]] = defaultdict(list)
    for edge in edges:
        if edge.kind is EdgeKind.SEQUENCE:
            successors[edge.source].append(edge.target)
    revertible = {e.target for e in edges if e.kind is EdgeKind.NEGATIVE}
    spans = {e.id: e.span for e in events}
    for component in _strongly_connected([e.id for e in events], successors):
        cyclic = len(component) > 1 or component[0] in successors[component[0]]
        if cyclic and not revertible.intersection(component):
            members = ", ".join(sorted(component))
            yield Violation(Rule.ILLEGAL_CYCLE, f"sequence cycle through {members} has no revert edge into it", members, spans[component[0]])


def _strongly_connected(nodes: list[str], successors: Mapping[str, list[str]]) -> list[list[str]]:
    """Tarjan's algorithm, iterative."""
    index_of: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []
    counter = 0
    for root in nodes:
        if root in index_of:
            continue
        work = [(root, iter(successors.get(root, ())))]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index_of:
                    index_of[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(successors.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index_of[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)
    return components


def _sample_values(model: StaticModel, name: str) -> list:
    variable = model.variable_index[name]
    if variable.type is VarType.BOOL:
        return [False, True]
    if variable.type is VarType.TEXT:
        return []
    if variable.domain is not None:
        low, high = variable.domain
        values = set(range(low, min(high, low + SAMPLE_SIZE - 1) + 1))
        values.add(high)
        return sorted(values)
    return list(range(-1, SAMPLE_SIZE - 1))


def _jointly_satisfiable(model: StaticModel, first: Expr, second: Expr) -> bool | None:
    """Whether some sampled assignment makes both guards true. None when sampling is not possible."""
    names = sorted(variables(first) | variables(second))
    domains = [_sample_values(model, n) for n in names]
    if any(not d for d in domains):
        return None
    total = 1
    for d in domains:
        total *= len(d)
    if total > SAMPLE_LIMIT:
        return None
    for combo in itertools.product(*domains):
        env = dict(zip(names, combo))
        try:
            if holds(first, env) and holds(second, env):
                return True
        except EvaluationError:
            continue
    return False


def _branch_warnings(model: StaticModel, index: Mapping[str, Event], edges: tuple[BehaviorEdge, ...]) -> Iterator[Violation]:
    by_source: dict[str, list[BehaviorEdge]] = defaultdict(list)
    for edge in edges:
        if edge.kind is EdgeKind.SEQUENCE and not index[edge.target].external:
            by_source[edge.source].append(edge)
    for source, branch in by_source.items():
        for first, second in itertools.combinations(branch, 2):
            if first.guard is None and second.guard is None:
                continue
            if first.guard is None or second.guard is None:
                overlapping: bool | None = True
            else:
                overlapping = _jointly_satisfiable(model, first.guard, second.guard)
            if overlapping:
                yield Violation(
                    Rule.UNGUARDED_BRANCH,
                    f"branches {first.target} and {second.target} out of {source} can both be enabled",
                    source,
                    second.span,
                    warning=True,
                )


# ---------------------------------------------------------------------------
# Enabledness
# ---------------------------------------------------------------------------


def alternatives(bg: BehaviorGraph, first: BehaviorEdge, second: BehaviorEdge) -> bool:
    """Sibling branches exclude each other when both are guarded or both lead to external responses."""
    if first.guard is not None and second.guard is not None:
        return True
    return bg.event(first.target).external and bg.event(second.target).external


def edge_consumed(bg: BehaviorGraph, state: SimState, edge: BehaviorEdge) -> bool:
    """A branch is used up once an alternative sibling fired after the source's actualization."""
    source_step = state.actualized[edge.source]
    for sibling in bg.outgoing.get(edge.source, ()):
        if sibling is edge or sibling.target == edge.target or not alternatives(bg, edge, sibling):
            continue
        if state.actualized.get(sibling.target, -1) > source_step:
            return True
    return False


def edge_open(bg: BehaviorGraph, state: SimState, edge: BehaviorEdge) -> bool:
    if edge.source not in state.actualized:
        return False
    if edge_consumed(bg, state, edge):
        return False
    return holds(edge.guard, state.env)


def receptive(bg: BehaviorGraph, state: SimState, event: Event) -> bool:
    """Whether ``event`` could occur now if something caused it, ignoring the external flag."""
    if event.id in state.actualized:
        return False
    incoming = bg.incoming.get(event.id, ())
    if incoming:
        structural = any(edge_open(bg, state, edge) for edge in incoming)
    else:
        structural = state.fire_counts.get(event.id, 0) == 0
    return structural and holds(event.guard, state.env)


def enabled_events(bg: BehaviorGraph, state: SimState) -> list[str]:
    """Events that may fire in ``state``, in declaration order.

    An event is enabled when it is not external and not actualized, its own
    guard holds, and either it is initial and has never fired or an
    actualized predecessor has an open sequence edge into it.
    """
    enabled = []
    for event in bg.events:
        if event.external or event.id in state.actualized:
            continue
        if event.id in bg.initial and state.fire_counts.get(event.id, 0) == 0:
            structural = True
        else:
            structural = any(edge_open(bg, state, edge) for edge in bg.incoming.get(event.id, ()))
        if structural and holds(event.guard, state.env):
            enabled.append(event.id)
    return enabled
