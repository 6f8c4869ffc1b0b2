"""JSON and Graphviz DOT renderings of a Document."""

from __future__ import annotations

import json
from collections.abc import Iterator
from enum import Enum

from ..model.behavior import EdgeKind
from ..model.engine import EventStimulus
from ..model.errors import UnsupportedLevelError
from ..model.expressions import to_source
from ..model.queue import Arrive, DownstreamFree
from ..model.static import ArcKind, StaticModel, ThimacDecl, simplify
from .builder import build_document
from .document import Document

TM_VERSION = 1


class ExportLevel(str, Enum):
    STATIC = "static"
    BEHAVIOR = "behavior"


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _thimac_dict(decl: ThimacDecl) -> dict:
    return {
        "name": decl.name,
        "note": decl.note,
        "actions": [{"kind": a.kind.value, "label": a.label, "note": a.note} for a in decl.actions],
        "children": [_thimac_dict(c) for c in decl.children],
    }


def _stimulus_dict(stimulus) -> dict:  # noqa: ANN001
    if isinstance(stimulus, EventStimulus):
        return {"event": stimulus.event, "at": stimulus.at}
    signal = stimulus.signal
    if isinstance(signal, Arrive):
        return {"queue": stimulus.queue, "signal": "arrive", "item": signal.instance, "at": stimulus.at}
    name = "free" if isinstance(signal, DownstreamFree) else "busy"
    return {"queue": stimulus.queue, "signal": name, "at": stimulus.at}


def document_to_dict(doc: Document) -> dict:
    return {
        "tm_version": TM_VERSION,
        "thimacs": [_thimac_dict(t) for t in doc.thimacs],
        "arcs": [
            {"kind": a.kind.value, "source": a.source, "target": a.target, "label": a.label}
            for a in sorted(doc.arcs, key=lambda a: (a.source, a.target, a.kind.value))
        ],
        "variables": [
            {"name": v.name, "type": v.type.value, "default": v.default, "domain": list(v.domain) if v.domain else None}
            for v in doc.variables
        ],
        "events": [
            {
                "id": e.id,
                "label": e.label,
                "region": list(e.refs),
                "guard": to_source(e.guard) if e.guard is not None else None,
                "effects": [{"target": a.target, "expr": to_source(a.expr)} for a in e.effects],
                "external": e.external,
                "note": e.note,
            }
            for e in doc.events
        ],
        "edges": [
            {
                "source": e.source,
                "target": e.target,
                "kind": e.kind.value,
                "guard": to_source(e.guard) if e.guard is not None else None,
            }
            for e in doc.edges
        ],
        "queues": [
            {"name": q.name, "phases": [{"phase": phase.value, "events": list(ids)} for phase, ids in q.phases]}
            for q in doc.queues
        ],
        "timelines": [
            {
                "name": t.name,
                "events": [
                    {"id": e.id, "label": e.label, "category": e.category.value, "anchor": e.anchor.to_dict(), "note": e.note}
                    for e in t.events
                ],
            }
            for t in doc.timelines
        ],
        "scenarios": [
            {
                "name": s.name,
                "bindings": dict(s.bindings),
                "stimuli": [_stimulus_dict(x) for x in s.stimuli],
            }
            for s in doc.scenarios
        ],
    }


def export_json(doc: Document) -> str:
    return json.dumps(document_to_dict(doc), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def _gvquote(text: str) -> str:
    return '"{}"'.format(text.replace("\\", "\\\\").replace('"', r"\"").replace("\n", r"\n"))


def _clusters(model: StaticModel, thimac: str, depth: int) -> Iterator[str]:
    pad = "  " * depth
    yield f"{pad}subgraph {_gvquote('cluster_' + thimac)} {{"
    yield f"{pad}  label={_gvquote(thimac)};"
    for aid in model.thimac_index[thimac].actions:
        action = model.action_index[aid]
        label = action.kind.keyword if not action.label else f"{action.kind.keyword}\n({action.label})"
        yield f"{pad}  {_gvquote(aid)} [label={_gvquote(label)}];"
    for child in model.thimacs:
        if child.parent == thimac:
            yield from _clusters(model, child.id, depth + 1)
    yield f"{pad}}}"


def _static_body(model: StaticModel) -> Iterator[str]:
    for thimac in model.thimacs:
        if thimac.parent is None:
            yield from _clusters(model, thimac.id, 1)
    for arc in model.arcs:
        attributes = []
        if arc.kind is ArcKind.TRIGGER:
            attributes.append("style=dashed")
        elif arc.contracted:
            attributes.append("style=bold")
        if arc.label:
            attributes.append(f"label={_gvquote(arc.label)}")
        suffix = f" [{', '.join(attributes)}]" if attributes else ""
        yield f"  {_gvquote(arc.source)} -> {_gvquote(arc.target)}{suffix};"


def _behavior_body(doc: Document) -> Iterator[str]:
    bundle = build_document(doc)
    for event in bundle.behavior.events:
        text = event.id if event.label == event.id else "\n".join((event.id, event.label))
        attributes = [f"label={_gvquote(text)}"]
        if event.external:
            attributes.append("style=dashed")
        yield f"  {_gvquote(event.id)} [{', '.join(attributes)}];"
    for edge in bundle.behavior.edges:
        if edge.kind is EdgeKind.NEGATIVE:
            yield f"  {_gvquote(edge.source)} -> {_gvquote(edge.target)} [dir=both, arrowtail=diamond, arrowhead=normal];"
        elif edge.guard is not None:
            yield f"  {_gvquote(edge.source)} -> {_gvquote(edge.target)} [label={_gvquote(to_source(edge.guard))}];"
        else:
            yield f"  {_gvquote(edge.source)} -> {_gvquote(edge.target)};"


def export_dot(doc: Document, level: ExportLevel | str, *, name: str = "model", simplified: bool = False) -> str:
    """Graphviz digraph of the static or the behavior level.

    Thimacs become nested clusters and trigger arcs are dashed. Revert edges
    carry a diamond tail. ``simplified`` draws the static level after
    release/transfer/receive chains are contracted.
    """
    try:
        level = ExportLevel(level)
    except ValueError:
        raise UnsupportedLevelError(level) from None

    if level is ExportLevel.STATIC:
        model = build_document(doc).model
        body = list(_static_body(simplify(model) if simplified else model))
    else:
        body = list(_behavior_body(doc))
    return "\n".join([f"digraph {_gvquote(name)} {{", *body, "}"]) + "\n"
