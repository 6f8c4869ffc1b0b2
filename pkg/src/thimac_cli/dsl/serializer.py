"""Canonical ``.tm`` text for a Document."""

from __future__ import annotations

import json
import re
from collections.abc import Iterator

from ..model.behavior import BehaviorEdge, EdgeKind
from ..model.engine import EventStimulus, QueueStimulus
from ..model.expressions import format_value, to_source
from ..model.queue import Arrive, DownstreamFree
from ..model.static import ActionDecl, ArcDecl, ArcKind, ThimacDecl, Variable
from ..model.timeline import Category, Timeline
from .document import Document, EventDecl, ScenarioDecl
from .grammar import KEYWORDS

INDENT = "  "
_BARE_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _note(note: str | None) -> str:
    return f" note {_quote(note)}" if note else ""


def _label(label: str) -> str:
    if label in KEYWORDS or not _BARE_LABEL.fullmatch(label):
        return _quote(label)
    return label


def _action(decl: ActionDecl) -> str:
    label = f" {_label(decl.label)}" if decl.label else ""
    return f"{decl.kind.keyword}{label}{_note(decl.note)}"


def _thimac(decl: ThimacDecl, depth: int = 0) -> Iterator[str]:
    pad = INDENT * depth
    yield f"{pad}thimac {decl.name}{_note(decl.note)} {{"
    for action in decl.actions:
        yield f"{pad}{INDENT}{_action(action)}"
    for child in decl.children:
        yield from _thimac(child, depth + 1)
    yield f"{pad}}}"


def _arc(decl: ArcDecl) -> str:
    if decl.kind is ArcKind.TRIGGER:
        return f"trigger {decl.source} -> {decl.target}"
    label = f" {decl.label}:" if decl.label else ""
    return f"flow{label} {decl.source} -> {decl.target}"


def _variable(var: Variable) -> str:
    text = f"var {var.name}: {var.type.value}"
    if var.domain is not None:
        text += f" in {var.domain[0]}..{var.domain[1]}"
    if var.default is not None:
        text += f" = {format_value(var.default)}"
    return text


def _event(decl: EventDecl) -> Iterator[str]:
    label = f" {_quote(decl.label)}" if decl.label is not None else ""
    yield f"event {decl.id}{label} = region {{ {', '.join(decl.refs)} }}" if decl.refs else f"event {decl.id}{label} = region {{ }}"
    if decl.guard is not None:
        yield f"{INDENT}guard {to_source(decl.guard)}"
    if decl.effects:
        yield f"{INDENT}effect {', '.join(str(e) for e in decl.effects)}"
    if decl.external:
        yield f"{INDENT}external"
    if decl.note:
        yield f"{INDENT}note {_quote(decl.note)}"


def _edge(edge: BehaviorEdge) -> str:
    if edge.kind is EdgeKind.NEGATIVE:
        return f"negedge {edge.source} -> revert {edge.target}"
    guard = f" guard {to_source(edge.guard)}" if edge.guard is not None else ""
    return f"edge {edge.source} -> {edge.target}{guard}"


def _queue(queue) -> Iterator[str]:  # noqa: ANN001
    if not queue.phases:
        yield f"queue {queue.name}"
        return
    yield f"queue {queue.name} {{"
    for phase, ids in queue.phases:
        yield f"{INDENT}{phase.value} {', '.join(ids)}"
    yield "}"


def _timeline(timeline: Timeline) -> Iterator[str]:
    yield f"timeline {timeline.name} {{"
    for event in timeline.events:
        category = f" as {event.category.value}" if event.category is not Category.OTHER else ""
        yield f"{INDENT}event {event.id} {_quote(event.label)}{category} {event.anchor}{_note(event.note)}"
    yield "}"


def _stimulus(stimulus: EventStimulus | QueueStimulus) -> str:
    if isinstance(stimulus, EventStimulus):
        return f"stimulus {stimulus.event} at {stimulus.at}"
    signal = stimulus.signal
    if isinstance(signal, Arrive):
        return f"arrive {stimulus.queue} {signal.instance} at {stimulus.at}"
    word = "free" if isinstance(signal, DownstreamFree) else "busy"
    return f"{word} {stimulus.queue} at {stimulus.at}"


def _scenario(scenario: ScenarioDecl) -> Iterator[str]:
    yield f"scenario {scenario.name} {{"
    for name, value in scenario.bindings:
        yield f"{INDENT}bind {name} = {format_value(value)}"
    for stimulus in scenario.stimuli:
        yield f"{INDENT}{_stimulus(stimulus)}"
    yield "}"


def serialize(doc: Document) -> str:
    """Render ``doc`` in canonical form. Sections are separated by one blank line."""
    sections: list[list[str]] = [
        [line for decl in doc.thimacs for line in _thimac(decl)],
        [_arc(a) for a in sorted(doc.arcs, key=lambda a: (a.source, a.target, a.kind.value))],
        [_variable(v) for v in doc.variables],
        [line for decl in doc.events for line in _event(decl)],
        [_edge(e) for e in doc.edges],
        [line for q in doc.queues for line in _queue(q)],
        [line for t in doc.timelines for line in _timeline(t)],
        [line for s in doc.scenarios for line in _scenario(s)],
    ]
    blocks = ["\n".join(lines) for lines in sections if lines]
    return "\n\n".join(blocks) + "\n" if blocks else ""
