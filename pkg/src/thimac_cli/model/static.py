"""Static (subsistence) level: thimacs, generic actions, flow and trigger arcs.

``build_model`` turns declarations into an immutable ``StaticModel`` and
reports every structural violation at once. ``validate`` re-checks an
existing model and ``simplify`` contracts release/transfer/receive chains
into direct arcs between create and process actions.
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Union

from .errors import ModelError, NotValidatedError, Rule, SourceSpan, ValidationReport, Violation
from .expressions import Value, VarType

logger = logging.getLogger(__name__)


class ActionKind(str, Enum):
    CREATE = "create"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER_IN = "transfer_in"
    TRANSFER_OUT = "transfer_out"
    RECEIVE = "receive"

    @property
    def keyword(self) -> str:
        """Spelling used in DSL source (``transfer in`` rather than ``transfer_in``)."""
        return self.value.replace("_", " ")

    @classmethod
    def from_keyword(cls, text: str) -> ActionKind:
        return cls(" ".join(text.split()).replace(" ", "_"))


class ArcKind(str, Enum):
    FLOW = "flow"
    TRIGGER = "trigger"


ADJACENCY: dict[ActionKind, frozenset[ActionKind]] = {
    ActionKind.CREATE: frozenset({ActionKind.PROCESS, ActionKind.RELEASE}),
    ActionKind.PROCESS: frozenset({ActionKind.CREATE, ActionKind.PROCESS, ActionKind.RELEASE}),
    ActionKind.RECEIVE: frozenset({ActionKind.PROCESS, ActionKind.RELEASE}),
    ActionKind.RELEASE: frozenset({ActionKind.TRANSFER_OUT}),
    ActionKind.TRANSFER_OUT: frozenset({ActionKind.TRANSFER_IN}),
    ActionKind.TRANSFER_IN: frozenset({ActionKind.RECEIVE}),
}

KEPT_KINDS = frozenset({ActionKind.CREATE, ActionKind.PROCESS})
ELIMINATED_KINDS = frozenset(set(ActionKind) - KEPT_KINDS)
TRIGGER_TARGETS = KEPT_KINDS
ROOT_KINDS = frozenset({ActionKind.CREATE, ActionKind.TRANSFER_IN})


def flow_permitted(source: ActionKind, target: ActionKind) -> bool:
    return target in ADJACENCY[source]


# ---------------------------------------------------------------------------
# Declarations (input of build_model)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionDecl:
    kind: ActionKind
    label: str | None = None
    note: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ThimacDecl:
    """A thimac and its nested members. Children get this thimac as parent."""

    name: str
    actions: tuple[ActionDecl, ...] = ()
    children: tuple[ThimacDecl, ...] = ()
    parent: str | None = None
    note: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ArcDecl:
    """A flow or trigger arc between two action references such as ``Shop.process.order``."""

    kind: ArcKind
    source: str
    target: str
    label: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Variable:
    name: str
    type: VarType
    default: Value | None = None
    domain: tuple[int, int] | None = None
    span: SourceSpan | None = field(default=None, compare=False)

    def admits(self, value: object) -> bool:
        if not self.type.accepts(value):
            return False
        if self.domain is not None:
            low, high = self.domain
            return low <= value <= high  # type: ignore[operator]
        return True


Declaration = Union[ThimacDecl, ArcDecl, Variable]


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Thimac:
    id: str
    name: str
    parent: str | None
    actions: tuple[str, ...]
    note: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Action:
    id: str
    kind: ActionKind
    owner: str
    label: str | None = None
    note: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def entity(self) -> str:
        """Label of the thing this action handles; defaults to the owning thimac's name."""
        return self.label or self.owner


@dataclass(frozen=True)
class Arc:
    kind: ArcKind
    source: str
    target: str
    label: str | None = None
    contracted: bool = False
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def id(self) -> str:
        return arc_id(self.kind, self.source, self.target)


def arc_id(kind: ArcKind, source: str, target: str) -> str:
    return f"{kind.value}:{source}->{target}"


def action_id(thimac: str, kind: ActionKind, label: str | None = None) -> str:
    return f"{thimac}.{kind.value}.{label}" if label else f"{thimac}.{kind.value}"


@dataclass(frozen=True)
class StaticModel:
    thimacs: tuple[Thimac, ...] = ()
    actions: tuple[Action, ...] = ()
    arcs: tuple[Arc, ...] = ()
    variables: tuple[Variable, ...] = ()
    simplified: bool = False
    entry_points: frozenset[str] = frozenset()

    @cached_property
    def action_index(self) -> dict[str, Action]:
        return {a.id: a for a in self.actions}

    @cached_property
    def thimac_index(self) -> dict[str, Thimac]:
        return {t.id: t for t in self.thimacs}

    @cached_property
    def arc_index(self) -> dict[str, Arc]:
        return {a.id: a for a in self.arcs}

    @cached_property
    def variable_types(self) -> dict[str, VarType]:
        return {v.name: v.type for v in self.variables}

    @cached_property
    def variable_index(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    @property
    def flow_arcs(self) -> tuple[Arc, ...]:
        return tuple(a for a in self.arcs if a.kind is ArcKind.FLOW)

    @property
    def trigger_arcs(self) -> tuple[Arc, ...]:
        return tuple(a for a in self.arcs if a.kind is ArcKind.TRIGGER)

    def resolve(self, ref: str) -> str | None:
        """Action id for a reference, or None when it is unknown or ambiguous."""
        return _resolve_ref(ref, self.action_index, _by_owner(self.actions))

    def actions_of(self, kind: ActionKind) -> tuple[Action, ...]:
        return tuple(a for a in self.actions if a.kind is kind)


def _by_owner(actions: Iterable[Action]) -> dict[str, list[Action]]:
    owned: dict[str, list[Action]] = defaultdict(list)
    for action in actions:
        owned[action.owner].append(action)
    return owned


def _resolve_ref(ref: str, index: dict[str, Action], owned: dict[str, list[Action]]) -> str | None:
    if ref in index:
        return ref
    parts = ref.split(".")
    if len(parts) != 2:
        return None
    thimac, token = parts
    try:
        kind = ActionKind(token)
    except ValueError:
        return None
    candidates = [a.id for a in owned.get(thimac, ()) if a.kind is kind]
    return candidates[0] if len(candidates) == 1 else None


def _describe_unresolved(ref: str, owned: dict[str, list[Action]], thimacs: set[str]) -> str:
    thimac = ref.split(".", 1)[0]
    if thimac not in thimacs:
        return f"'{ref}' names no known thimac"
    parts = ref.split(".")
    if len(parts) == 2:
        matches = [a for a in owned.get(thimac, ()) if a.kind.value == parts[1]]
        if len(matches) > 1:
            return f"'{ref}' is ambiguous between {', '.join(a.id for a in matches)}"
    return f"'{ref}' names no action"


# ---------------------------------------------------------------------------
# build_model
# ---------------------------------------------------------------------------


def _flatten(decl: ThimacDecl, parent: str | None) -> Iterator[tuple[ThimacDecl, str | None]]:
    yield decl, parent if parent is not None else decl.parent
    for child in decl.children:
        yield from _flatten(child, decl.name)


def assemble(elements: Iterable[Declaration]) -> tuple[StaticModel, list[Violation]]:
    """Build a model from declarations and return it with every violation found.

    Elements that cannot be placed (duplicates, unresolved arc endpoints) are
    left out of the returned model.
    """
    violations: list[Violation] = []
    thimac_decls: list[tuple[ThimacDecl, str | None]] = []
    arc_decls: list[ArcDecl] = []
    variables: list[Variable] = []
    for element in elements:
        if isinstance(element, ThimacDecl):
            thimac_decls.extend(_flatten(element, None))
        elif isinstance(element, ArcDecl):
            arc_decls.append(element)
        elif isinstance(element, Variable):
            variables.append(element)
        else:
            raise TypeError(f"unsupported declaration {element!r}")

    thimacs: dict[str, Thimac] = {}
    actions: dict[str, Action] = {}
    for decl, parent in thimac_decls:
        if decl.name in thimacs:
            violations.append(Violation(Rule.DUPLICATE_ID, f"thimac '{decl.name}' is declared twice", decl.name, decl.span))
            continue
        owned: list[str] = []
        for action_decl in decl.actions:
            aid = action_id(decl.name, action_decl.kind, action_decl.label)
            if aid in actions:
                violations.append(Violation(Rule.DUPLICATE_ID, f"action '{aid}' is declared twice", aid, action_decl.span))
                continue
            actions[aid] = Action(aid, action_decl.kind, decl.name, action_decl.label, action_decl.note, action_decl.span)
            owned.append(aid)
        thimacs[decl.name] = Thimac(decl.name, decl.name, parent, tuple(owned), decl.note, decl.span)

    seen_variables: dict[str, Variable] = {}
    for variable in variables:
        if variable.name in seen_variables:
            violations.append(
                Violation(Rule.DUPLICATE_ID, f"variable '{variable.name}' is declared twice", variable.name, variable.span)
            )
            continue
        if variable.default is not None and not variable.admits(variable.default):
            violations.append(
                Violation(
                    Rule.BINDING_TYPE_ERROR,
                    f"default {variable.default!r} does not fit {variable.type.value} variable '{variable.name}'",
                    variable.name,
                    variable.span,
                )
            )
        seen_variables[variable.name] = variable

    index = dict(actions)
    by_owner = _by_owner(actions.values())
    arcs: dict[str, Arc] = {}
    for decl in arc_decls:
        endpoints = []
        for ref in (decl.source, decl.target):
            resolved = _resolve_ref(ref, index, by_owner)
            if resolved is None:
                violations.append(
                    Violation(Rule.UNKNOWN_REFERENCE, _describe_unresolved(ref, by_owner, set(thimacs)), ref, decl.span)
                )
            endpoints.append(resolved)
        source, target = endpoints
        if source is None or target is None:
            continue
        arc = Arc(decl.kind, source, target, decl.label, span=decl.span)
        if arc.id in arcs:
            violations.append(Violation(Rule.DUPLICATE_ID, f"arc '{arc.id}' is declared twice", arc.id, decl.span))
            continue
        arcs[arc.id] = arc

    model = StaticModel(
        thimacs=tuple(thimacs.values()),
        actions=tuple(actions.values()),
        arcs=tuple(arcs.values()),
        variables=tuple(seen_variables.values()),
    )
    violations.extend(validate(model).violations)
    return model, violations


def build_model(elements: Iterable[Declaration]) -> StaticModel:
    """Build and validate a StaticModel. Raises ModelError listing every violation."""
    model, violations = assemble(elements)
    if violations:
        logger.debug("build_model found %d violation(s)", len(violations))
        raise ModelError(violations)
    logger.debug("Built static model: %d thimac(s), %d action(s), %d arc(s)", len(model.thimacs), len(model.actions), len(model.arcs))
    return model


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def validate(model: StaticModel) -> ValidationReport:
    """Check every structural rule and return all violations."""
    violations: list[Violation] = []
    violations.extend(_check_duplicates(model))
    violations.extend(_check_containment(model))
    violations.extend(_check_arcs(model))
    violations.extend(_check_orphans(model))
    return ValidationReport(tuple(violations))


def _check_duplicates(model: StaticModel) -> Iterator[Violation]:
    for what, items in (
        ("thimac", [(t.id, t.span) for t in model.thimacs]),
        ("action", [(a.id, a.span) for a in model.actions]),
        ("arc", [(a.id, a.span) for a in model.arcs]),
        ("variable", [(v.name, v.span) for v in model.variables]),
    ):
        seen: set[str] = set()
        for ident, span in items:
            if ident in seen:
                yield Violation(Rule.DUPLICATE_ID, f"{what} '{ident}' is declared twice", ident, span)
            seen.add(ident)


def _check_containment(model: StaticModel) -> Iterator[Violation]:
    thimacs = model.thimac_index
    for thimac in model.thimacs:
        if thimac.parent is not None and thimac.parent not in thimacs:
            yield Violation(Rule.UNKNOWN_REFERENCE, f"parent '{thimac.parent}' of '{thimac.id}' is unknown", thimac.id, thimac.span)
        for aid in thimac.actions:
            action = model.action_index.get(aid)
            if action is None or action.owner != thimac.id:
                yield Violation(Rule.UNKNOWN_REFERENCE, f"thimac '{thimac.id}' lists unknown action '{aid}'", aid, thimac.span)

    for action in model.actions:
        if action.owner not in thimacs:
            yield Violation(Rule.UNKNOWN_REFERENCE, f"owner '{action.owner}' of '{action.id}' is unknown", action.id, action.span)

    reported: set[frozenset[str]] = set()
    for thimac in model.thimacs:
        chain: list[str] = []
        current: str | None = thimac.id
        while current is not None and current in thimacs and current not in chain:
            chain.append(current)
            current = thimacs[current].parent
        if current is not None and current in chain:
            cycle = frozenset(chain[chain.index(current) :])
            if cycle not in reported:
                reported.add(cycle)
                members = ", ".join(sorted(cycle))
                yield Violation(Rule.CYCLIC_CONTAINMENT, f"thimacs contain each other: {members}", members, thimacs[current].span)


def _check_arcs(model: StaticModel) -> Iterator[Violation]:
    index = model.action_index
    for arc in model.arcs:
        source = index.get(arc.source)
        target = index.get(arc.target)
        if source is None or target is None:
            missing = arc.source if source is None else arc.target
            yield Violation(Rule.UNKNOWN_REFERENCE, f"arc '{arc.id}' points at unknown action '{missing}'", arc.id, arc.span)
            continue

        if arc.kind is ArcKind.TRIGGER:
            if target.kind not in TRIGGER_TARGETS:
                yield Violation(
                    Rule.ILLEGAL_TRIGGER_TARGET,
                    f"trigger '{arc.id}' targets a {target.kind.keyword} action; only create and process can be triggered",
                    arc.id,
                    arc.span,
                )
            continue

        if arc.contracted and model.simplified:
            if source.kind not in KEPT_KINDS or target.kind not in KEPT_KINDS:
                yield Violation(
                    Rule.ILLEGAL_ADJACENCY,
                    f"contracted flow '{arc.id}' must join create/process actions",
                    arc.id,
                    arc.span,
                )
            continue

        if not flow_permitted(source.kind, target.kind):
            yield Violation(
                Rule.ILLEGAL_ADJACENCY,
                f"{source.kind.keyword} cannot flow into {target.kind.keyword} ({arc.source} -> {arc.target})",
                arc.id,
                arc.span,
            )

        crossing = source.owner != target.owner
        transfer = source.kind is ActionKind.TRANSFER_OUT and target.kind is ActionKind.TRANSFER_IN
        if transfer and not crossing:
            yield Violation(
                Rule.ILLEGAL_BOUNDARY_CROSSING,
                f"transfer '{arc.id}' stays inside thimac '{source.owner}'",
                arc.id,
                arc.span,
            )
        elif crossing and not transfer:
            yield Violation(
                Rule.ILLEGAL_BOUNDARY_CROSSING,
                f"flow '{arc.id}' crosses from '{source.owner}' to '{target.owner}' without a transfer",
                arc.id,
                arc.span,
            )


def _check_orphans(model: StaticModel) -> Iterator[Violation]:
    successors: dict[str, list[str]] = defaultdict(list)
    for arc in model.arcs:
        successors[arc.source].append(arc.target)
    roots = [a.id for a in model.actions if a.kind in ROOT_KINDS or a.id in model.entry_points]
    reached = set(roots)
    queue = deque(roots)
    while queue:
        for nxt in successors[queue.popleft()]:
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    for action in model.actions:
        if action.id not in reached:
            yield Violation(
                Rule.ORPHAN_ACTION,
                f"'{action.id}' is not reachable from any create or transfer in",
                action.id,
                action.span,
            )


# ---------------------------------------------------------------------------
# simplify
# ---------------------------------------------------------------------------


def simplify(model: StaticModel) -> StaticModel:
    """Contract release/transfer/receive chains into direct arcs between kept actions.

    Requires a model with an empty validation report. A model with nothing to
    eliminate is returned unchanged, which makes the operation idempotent.
    """
    report = validate(model)
    if not report.is_clean:
        raise NotValidatedError(report.errors, "simplify needs a well-formed model")

    eliminated = {a.id for a in model.actions if a.kind in ELIMINATED_KINDS}
    if not eliminated:
        return model

    flow_in: dict[str, list[str]] = defaultdict(list)
    for arc in model.flow_arcs:
        flow_in[arc.target].append(arc.source)

    def feeders(node: str) -> tuple[set[str], bool]:
        """Kept actions reaching ``node`` through eliminated actions only, and whether a root transfer does."""
        kept: set[str] = set()
        rooted = False
        seen = {node}
        stack = [node]
        while stack:
            current = stack.pop()
            if not flow_in[current]:
                rooted = True
            for prev in flow_in[current]:
                if prev in eliminated:
                    if prev not in seen:
                        seen.add(prev)
                        stack.append(prev)
                else:
                    kept.add(prev)
        return kept, rooted

    arcs: dict[str, Arc] = {}
    entry_points = set(model.entry_points) - eliminated

    for arc in model.arcs:
        if arc.source not in eliminated and arc.target not in eliminated:
            arcs.setdefault(arc.id, arc)

    for arc in model.arcs:
        if arc.source not in eliminated or arc.target in eliminated:
            continue
        kept, rooted = feeders(arc.source)
        for source in sorted(kept):
            contracted = Arc(arc.kind, source, arc.target, arc.label, contracted=arc.kind is ArcKind.FLOW, span=arc.span)
            arcs.setdefault(contracted.id, contracted)
        if rooted:
            entry_points.add(arc.target)

    actions = tuple(a for a in model.actions if a.id not in eliminated)
    thimacs = tuple(replace(t, actions=tuple(a for a in t.actions if a not in eliminated)) for t in model.thimacs)
    ordered = sorted(arcs.values(), key=lambda a: (a.kind.value, a.source, a.target))
    logger.debug("Simplified model: removed %d action(s), %d arc(s) remain", len(eliminated), len(ordered))
    return StaticModel(
        thimacs=thimacs,
        actions=actions,
        arcs=tuple(ordered),
        variables=model.variables,
        simplified=True,
        entry_points=frozenset(entry_points),
    )


def flow_reachability(model: StaticModel, kinds: frozenset[ActionKind] = KEPT_KINDS) -> set[tuple[str, str]]:
    """Pairs (a, b) of actions of ``kinds`` such that a flow path leads from a to b."""
    successors: dict[str, list[str]] = defaultdict(list)
    for arc in model.flow_arcs:
        successors[arc.source].append(arc.target)
    selected = [a.id for a in model.actions if a.kind in kinds]
    pairs: set[tuple[str, str]] = set()
    wanted = set(selected)
    for start in selected:
        seen: set[str] = set()
        stack = list(successors[start])
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            if node in wanted:
                pairs.add((start, node))
            stack.extend(successors[node])
    return pairs
