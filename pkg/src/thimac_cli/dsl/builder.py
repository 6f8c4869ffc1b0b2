"""Semantic checking: turn a parsed Document into a static model and a behavior graph."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass

from ..model.behavior import BehaviorGraph, build_behavior
from ..model.engine import EventStimulus, QueueStimulus, SimState, init_state
from ..model.errors import BehaviorError, EventDefinitionError, Rule, SemanticError, UnknownEntryError, Violation
from ..model.events import Event, define_event
from ..model.expressions import format_value
from ..model.queue import QueueSpec
from ..model.static import StaticModel, assemble
from ..model.timeline import Timeline, check_timeline
from .document import Document, ScenarioDecl

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bundle:
    """Everything a valid document builds into."""

    document: Document
    model: StaticModel
    behavior: BehaviorGraph
    warnings: tuple[Violation, ...] = ()

    @property
    def timelines(self) -> tuple[Timeline, ...]:
        return self.document.timelines

    @property
    def scenarios(self) -> tuple[ScenarioDecl, ...]:
        return self.document.scenarios

    @property
    def queues(self) -> tuple[QueueSpec, ...]:
        return self.document.queues

    def scenario(self, name: str) -> ScenarioDecl:
        for scenario in self.document.scenarios:
            if scenario.name == name:
                return scenario
        raise UnknownEntryError(f"no scenario named '{name}'")

    def timeline(self, name: str) -> Timeline:
        for timeline in self.document.timelines:
            if timeline.name == name:
                return timeline
        raise UnknownEntryError(f"no timeline named '{name}'")

    def start(self, scenario: ScenarioDecl | None = None, *, strict: bool = True) -> SimState:
        """Fresh engine state for ``scenario`` (no bindings or stimuli when omitted)."""
        bindings: Mapping = scenario.binding_map() if scenario else {}
        stimuli = scenario.stimuli if scenario else ()
        return init_state(self.behavior, bindings, stimuli, queues=self.document.queues, strict=strict)


def _events(doc: Document, model: StaticModel) -> tuple[list[Event], list[Violation]]:
    events: list[Event] = []
    violations: list[Violation] = []
    for decl in doc.events:
        try:
            events.append(
                define_event(
                    model,
                    decl.id,
                    decl.label or decl.id,
                    decl.refs,
                    guard=decl.guard,
                    effects=decl.effects,
                    external=decl.external,
                    note=decl.note,
                    span=decl.span,
                )
            )
        except EventDefinitionError as exc:
            violations.append(Violation(exc.rule, exc.message, decl.id, decl.span))
    return events, violations


def _check_queues(doc: Document) -> list[Violation]:
    known = {e.id for e in doc.events}
    violations = []
    for queue in doc.queues:
        for event_id in queue.event_ids():
            if event_id not in known:
                violations.append(Violation(Rule.UNKNOWN_EVENT, f"queue {queue.name} binds unknown event '{event_id}'", event_id, queue.span))
    return violations


def _check_scenarios(doc: Document, model: StaticModel) -> list[Violation]:
    events = {e.id for e in doc.events}
    queues = {q.name for q in doc.queues}
    violations = []
    for scenario in doc.scenarios:
        for name, value in scenario.bindings:
            variable = model.variable_index.get(name)
            if variable is None:
                violations.append(
                    Violation(Rule.UNDECLARED_VARIABLE, f"scenario {scenario.name} binds undeclared variable '{name}'", name, scenario.span)
                )
            elif not variable.admits(value):
                violations.append(
                    Violation(
                        Rule.BINDING_TYPE_ERROR,
                        f"scenario {scenario.name}: {format_value(value)} does not fit {variable.type.value} variable '{name}'",
                        name,
                        scenario.span,
                    )
                )
        for stimulus in scenario.stimuli:
            if isinstance(stimulus, EventStimulus) and stimulus.event not in events:
                violations.append(
                    Violation(Rule.UNKNOWN_EVENT, f"scenario {scenario.name} stimulates unknown event '{stimulus.event}'", stimulus.event, stimulus.span)
                )
            elif isinstance(stimulus, QueueStimulus) and stimulus.queue not in queues:
                violations.append(
                    Violation(Rule.UNKNOWN_QUEUE, f"scenario {scenario.name} signals unknown queue '{stimulus.queue}'", stimulus.queue, stimulus.span)
                )
    return violations


def build_document(doc: Document) -> Bundle:
    """Build and check everything ``doc`` declares. Raises SemanticError listing every violation."""
    model, violations = assemble([*doc.thimacs, *doc.arcs, *doc.variables])

    behavior = None
    warnings: tuple[Violation, ...] = ()
    if not violations:
        events, event_violations = _events(doc, model)
        violations.extend(event_violations)
        if not event_violations:
            try:
                behavior = build_behavior(model, events, doc.edges)
                warnings = behavior.warnings
            except BehaviorError as exc:
                violations.extend(exc.violations)

    violations.extend(_check_queues(doc))
    for timeline in doc.timelines:
        violations.extend(check_timeline(timeline))
    violations.extend(_check_scenarios(doc, model))

    if violations or behavior is None:
        logger.debug("%s: %d semantic violation(s)", doc.source, len(violations))
        raise SemanticError(violations)
    logger.debug("%s: built %d event(s) with %d warning(s)", doc.source, len(behavior.events), len(warnings))
    return Bundle(document=doc, model=model, behavior=behavior, warnings=warnings)
