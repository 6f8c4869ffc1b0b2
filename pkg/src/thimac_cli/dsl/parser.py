"""Parser for ``.tm`` sources.

Uses Lark to turn source text into a ``Document``. Syntax errors do not stop
the parse: offending tokens are skipped so that every error in the input is
reported at once.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable
from functools import lru_cache
from pathlib import Path

from lark import Lark, Token, Transformer, UnexpectedCharacters, UnexpectedInput, UnexpectedToken, v_args
from lark.lexer import PatternStr

from ..model.behavior import BehaviorEdge, EdgeKind
from ..model.engine import EventStimulus, QueueStimulus
from ..model.errors import DslSyntaxError, Rule, SourceSpan, Violation
from ..model.expressions import Assignment, BinOp, Literal, Neg, Not, Var, VarType
from ..model.queue import Arrive, DownstreamBusy, DownstreamFree, QueuePhase, QueueSpec
from ..model.static import ActionDecl, ActionKind, ArcDecl, ArcKind, ThimacDecl, Variable
from ..model.timeline import Category, ClinicalEvent, TimeAnchor, Timeline
from .document import Document, EventDecl, ScenarioDecl
from .grammar import TERMINAL_NAMES, TM_GRAMMAR

logger = logging.getLogger(__name__)

MAX_SYNTAX_ERRORS = 20


class _Note(str):
    pass


class _Guard:
    def __init__(self, expr) -> None:  # noqa: ANN001
        self.expr = expr


class _Effects(tuple):
    pass


class _External:
    pass


class _Binding:
    def __init__(self, name: str, value: Literal) -> None:
        self.name = name
        self.value = value


def _decode(token: Token) -> str:
    try:
        return json.loads(token)
    except ValueError:
        return str(token)[1:-1]


class TmTransformer(Transformer):
    """Transforms the Lark parse tree into a Document."""

    def __init__(self, source: str) -> None:
        super().__init__()
        self.source = source
        self.problems: list[Violation] = []

    def _span(self, meta) -> SourceSpan | None:  # noqa: ANN001
        if getattr(meta, "empty", True):
            return None
        return SourceSpan(self.source, meta.line, meta.column)

    def _token_span(self, token: Token) -> SourceSpan:
        return SourceSpan(self.source, token.line or 1, token.column or 1)

    # =========================================================================
    # Top-level
    # =========================================================================

    def start(self, items) -> Document:  # noqa: ANN001
        sections: dict[type, list] = {kind: [] for kind in (ThimacDecl, ArcDecl, Variable, EventDecl, BehaviorEdge, QueueSpec, Timeline, ScenarioDecl)}
        for item in items:
            for element in item if isinstance(item, list) else [item]:
                sections[type(element)].append(element)
        arcs = sorted(sections[ArcDecl], key=lambda a: (a.source, a.target, a.kind.value))
        return Document(
            thimacs=tuple(sections[ThimacDecl]),
            arcs=tuple(arcs),
            variables=tuple(sections[Variable]),
            events=tuple(sections[EventDecl]),
            edges=tuple(sections[BehaviorEdge]),
            queues=tuple(sections[QueueSpec]),
            timelines=tuple(sections[Timeline]),
            scenarios=tuple(sections[ScenarioDecl]),
            source=self.source,
        )

    def note(self, items) -> _Note:  # noqa: ANN001
        return _Note(_decode(items[0]))

    # =========================================================================
    # Static level
    # =========================================================================

    @v_args(meta=True)
    def thimac(self, meta, items) -> ThimacDecl:  # noqa: ANN001
        note = None
        actions = []
        children = []
        for item in items[1:]:
            if isinstance(item, _Note):
                note = str(item)
            elif isinstance(item, ActionDecl):
                actions.append(item)
            elif isinstance(item, ThimacDecl):
                children.append(item)
        return ThimacDecl(str(items[0]), tuple(actions), tuple(children), note=note, span=self._span(meta))

    @v_args(meta=True)
    def action(self, meta, items) -> ActionDecl:  # noqa: ANN001
        kind, label, note = items[0], None, None
        for item in items[1:]:
            if isinstance(item, _Note):
                note = str(item)
            else:
                label = _decode(item) if item.type == "STRING" else str(item)
        return ActionDecl(kind, label, note, self._span(meta))

    def action_kind(self, items) -> ActionKind:  # noqa: ANN001
        return ActionKind.from_keyword(" ".join(str(t) for t in items))

    def _chain(self, kind: ArcKind, meta, items) -> list[ArcDecl]:  # noqa: ANN001
        label = None
        if items and items[0].type == "NAME":
            label = str(items[0])
            items = items[1:]
        span = self._span(meta)
        return [ArcDecl(kind, str(a), str(b), label, span) for a, b in zip(items, items[1:])]

    @v_args(meta=True)
    def flow(self, meta, items) -> list[ArcDecl]:  # noqa: ANN001
        return self._chain(ArcKind.FLOW, meta, items)

    @v_args(meta=True)
    def trigger(self, meta, items) -> list[ArcDecl]:  # noqa: ANN001
        return self._chain(ArcKind.TRIGGER, meta, items)

    @v_args(meta=True)
    def var(self, meta, items) -> Variable:  # noqa: ANN001
        name, var_type = str(items[0]), items[1]
        domain = None
        default = None
        for item in items[2:]:
            if isinstance(item, tuple):
                domain = item
            else:
                default = item.value
        return Variable(name, var_type, default, domain, self._span(meta))

    def var_type(self, items) -> VarType:  # noqa: ANN001
        return VarType(str(items[0]))

    def domain(self, items) -> tuple[int, int]:  # noqa: ANN001
        return items[0].value, items[1].value

    # =========================================================================
    # Dynamic level
    # =========================================================================

    @v_args(meta=True)
    def event(self, meta, items) -> EventDecl:  # noqa: ANN001
        event_id = str(items[0])
        label = None
        refs: list[str] = []
        guards = []
        effects: list[Assignment] = []
        external = False
        note = None
        for item in items[1:]:
            if isinstance(item, Token) and item.type == "STRING":
                label = _decode(item)
            elif isinstance(item, Token):
                refs.append(str(item))
            elif isinstance(item, _Guard):
                guards.append(item.expr)
            elif isinstance(item, _Effects):
                effects.extend(item)
            elif isinstance(item, _External):
                external = True
            elif isinstance(item, _Note):
                note = str(item)
        guard = None
        for expr in guards:
            guard = expr if guard is None else BinOp("&&", guard, expr)
        return EventDecl(event_id, tuple(refs), label, guard, tuple(effects), external, note, self._span(meta))

    def guard(self, items) -> _Guard:  # noqa: ANN001
        return _Guard(items[0])

    def effect(self, items) -> _Effects:  # noqa: ANN001
        return _Effects(items)

    def assignment(self, items) -> Assignment:  # noqa: ANN001
        return Assignment(str(items[0]), items[1])

    def external(self, items) -> _External:  # noqa: ANN001
        return _External()

    @v_args(meta=True)
    def edge(self, meta, items) -> BehaviorEdge:  # noqa: ANN001
        guard = items[2].expr if len(items) > 2 else None
        return BehaviorEdge(str(items[0]), str(items[1]), EdgeKind.SEQUENCE, guard, self._span(meta))

    @v_args(meta=True)
    def negedge(self, meta, items) -> BehaviorEdge:  # noqa: ANN001
        return BehaviorEdge(str(items[0]), str(items[1]), EdgeKind.NEGATIVE, None, self._span(meta))

    @v_args(meta=True)
    def queue(self, meta, items) -> QueueSpec:  # noqa: ANN001
        return QueueSpec(str(items[0]), tuple(items[1:]), self._span(meta))

    def phase(self, items) -> tuple[QueuePhase, tuple[str, ...]]:  # noqa: ANN001
        return items[0], tuple(str(t) for t in items[1:])

    def phase_kind(self, items) -> QueuePhase:  # noqa: ANN001
        return QueuePhase(str(items[0]))

    # =========================================================================
    # Timelines and scenarios
    # =========================================================================

    @v_args(meta=True)
    def timeline(self, meta, items) -> Timeline:  # noqa: ANN001
        return Timeline(str(items[0]), tuple(items[1:]), self._span(meta))

    @v_args(meta=True)
    def tl_event(self, meta, items) -> ClinicalEvent:  # noqa: ANN001
        event_id, label = str(items[0]), _decode(items[1])
        category = Category.OTHER
        anchor = TimeAnchor.unknown()
        note = None
        span = self._span(meta)
        for item in items[2:]:
            if isinstance(item, Token):
                try:
                    category = Category(str(item))
                except ValueError:
                    known = ", ".join(c.value for c in Category)
                    self.problems.append(
                        Violation(Rule.UNKNOWN_CATEGORY, f"unknown category '{item}' (expected one of: {known})", event_id, self._token_span(item))
                    )
            elif isinstance(item, TimeAnchor):
                anchor = item
            elif isinstance(item, _Note):
                note = str(item)
        return ClinicalEvent(event_id, label, anchor, category, note, span)

    def at_anchor(self, items) -> TimeAnchor:  # noqa: ANN001
        return TimeAnchor.instant(str(items[0]))

    def interval_anchor(self, items) -> TimeAnchor:  # noqa: ANN001
        return TimeAnchor.interval(str(items[0]), str(items[1]))

    def after_anchor(self, items) -> TimeAnchor:  # noqa: ANN001
        return TimeAnchor.after(str(items[0]))

    def unknown_anchor(self, items) -> TimeAnchor:  # noqa: ANN001
        return TimeAnchor.unknown()

    @v_args(meta=True)
    def scenario(self, meta, items) -> ScenarioDecl:  # noqa: ANN001
        bindings = tuple((b.name, b.value.value) for b in items[1:] if isinstance(b, _Binding))
        stimuli = tuple(s for s in items[1:] if not isinstance(s, _Binding))
        return ScenarioDecl(str(items[0]), bindings, stimuli, self._span(meta))

    def bind(self, items) -> _Binding:  # noqa: ANN001
        return _Binding(str(items[0]), items[1])

    def at(self, items) -> int:  # noqa: ANN001
        return int(items[0])

    @staticmethod
    def _when(items) -> int:  # noqa: ANN001
        return items[-1] if isinstance(items[-1], int) else 0

    @v_args(meta=True)
    def stimulus(self, meta, items) -> EventStimulus:  # noqa: ANN001
        return EventStimulus(str(items[0]), self._when(items), self._span(meta))

    @v_args(meta=True)
    def arrive(self, meta, items) -> QueueStimulus:  # noqa: ANN001
        return QueueStimulus(str(items[0]), Arrive(str(items[1])), self._when(items), self._span(meta))

    @v_args(meta=True)
    def free(self, meta, items) -> QueueStimulus:  # noqa: ANN001
        return QueueStimulus(str(items[0]), DownstreamFree(), self._when(items), self._span(meta))

    @v_args(meta=True)
    def busy(self, meta, items) -> QueueStimulus:  # noqa: ANN001
        return QueueStimulus(str(items[0]), DownstreamBusy(), self._when(items), self._span(meta))

    # =========================================================================
    # Expressions
    # =========================================================================

    def or_op(self, items) -> BinOp:  # noqa: ANN001
        return BinOp("||", items[0], items[1])

    def and_op(self, items) -> BinOp:  # noqa: ANN001
        return BinOp("&&", items[0], items[1])

    def compare(self, items) -> BinOp:  # noqa: ANN001
        return BinOp(str(items[1]), items[0], items[2])

    def add(self, items) -> BinOp:  # noqa: ANN001
        return BinOp("+", items[0], items[1])

    def sub(self, items) -> BinOp:  # noqa: ANN001
        return BinOp("-", items[0], items[1])

    def not_op(self, items) -> Not:  # noqa: ANN001
        return Not(items[0])

    def neg_op(self, items) -> Literal | Neg:  # noqa: ANN001
        operand = items[0]
        if isinstance(operand, Literal) and type(operand.value) is int:
            return Literal(-operand.value)
        return Neg(operand)

    def int_value(self, items) -> Literal:  # noqa: ANN001
        return Literal(int(items[0]))

    def neg_int_value(self, items) -> Literal:  # noqa: ANN001
        return Literal(-int(items[0]))

    def true_value(self, items) -> Literal:  # noqa: ANN001
        return Literal(True)

    def false_value(self, items) -> Literal:  # noqa: ANN001
        return Literal(False)

    def text_value(self, items) -> Literal:  # noqa: ANN001
        return Literal(_decode(items[0]))

    def var_ref(self, items) -> Var:  # noqa: ANN001
        return Var(str(items[0]))


def _duplicate_names(doc: Document) -> Iterable[Violation]:
    def walk(decls: Iterable[ThimacDecl]) -> Iterable[ThimacDecl]:
        for decl in decls:
            yield decl
            yield from walk(decl.children)

    namespaces = [
        ("thimac", [(t.name, t.span) for t in walk(doc.thimacs)]),
        ("event", [(e.id, e.span) for e in doc.events]),
        ("variable", [(v.name, v.span) for v in doc.variables]),
        ("queue", [(q.name, q.span) for q in doc.queues]),
        ("timeline", [(t.name, t.span) for t in doc.timelines]),
        ("scenario", [(s.name, s.span) for s in doc.scenarios]),
    ]
    for timeline in doc.timelines:
        namespaces.append((f"event of timeline {timeline.name}", [(e.id, e.span) for e in timeline.events]))
    for what, entries in namespaces:
        seen: set[str] = set()
        for name, span in entries:
            if name in seen:
                yield Violation(Rule.DUPLICATE_NAME, f"{what} '{name}' is declared more than once", name, span)
            seen.add(name)


class TmParser:
    """Parser for ``.tm`` documents."""

    def __init__(self) -> None:
        self._lark = Lark(TM_GRAMMAR, parser="lalr", lexer="contextual", propagate_positions=True, maybe_placeholders=False)

    def _describe(self, names: Iterable[str]) -> str:
        described = set()
        for name in names:
            if name in TERMINAL_NAMES:
                described.add(TERMINAL_NAMES[name])
                continue
            try:
                pattern = self._lark.get_terminal(name).pattern
            except KeyError:
                described.add(name)
                continue
            described.add(f'"{pattern.value}"' if isinstance(pattern, PatternStr) else name.lower())
        return ", ".join(sorted(described))

    def _diagnostic(self, exc: UnexpectedInput, text: str, source: str) -> Violation:
        lines = text.splitlines() or [""]
        line = exc.line if isinstance(exc.line, int) and exc.line >= 1 else len(lines)
        line = min(line, len(lines))
        column = exc.column if isinstance(exc.column, int) and exc.column >= 1 else len(lines[line - 1]) + 1
        if isinstance(exc, UnexpectedCharacters):
            found = repr(text[exc.pos_in_stream]) if 0 <= exc.pos_in_stream < len(text) else "end of input"
            message = f"unexpected character {found}, expected {self._describe(exc.allowed or ())}"
        elif isinstance(exc, UnexpectedToken):
            found = "end of input" if exc.token.type == "$END" else f"'{exc.token}'"
            message = f"unexpected {found}, expected {self._describe(exc.accepts or exc.expected)}"
        else:
            message = "unexpected end of input"
        return Violation(Rule.SYNTAX_ERROR, message, "", SourceSpan(source, line, column))

    def parse(self, text: str, source: str = "<string>") -> Document:
        """Parse ``text``. Raises DslSyntaxError with every diagnostic found."""
        errors: list[UnexpectedInput] = []

        def recover(exc: UnexpectedInput) -> bool:
            errors.append(exc)
            if isinstance(exc, UnexpectedToken) and exc.token.type == "$END":
                return False
            return len(errors) < MAX_SYNTAX_ERRORS

        tree = None
        try:
            tree = self._lark.parse(text, on_error=recover)
        except UnexpectedInput as exc:
            if not errors or errors[-1] is not exc:
                errors.append(exc)

        diagnostics: list[Violation] = []
        seen: set[tuple[int, int]] = set()
        for exc in errors:
            diagnostic = self._diagnostic(exc, text, source)
            key = (diagnostic.span.line, diagnostic.span.column)  # type: ignore[union-attr]
            if key not in seen:
                seen.add(key)
                diagnostics.append(diagnostic)
        if diagnostics or tree is None:
            logger.debug("%s: %d syntax error(s)", source, len(diagnostics))
            raise DslSyntaxError(diagnostics)

        transformer = TmTransformer(source)
        document = transformer.transform(tree)
        problems = transformer.problems + list(_duplicate_names(document))
        if problems:
            raise DslSyntaxError(problems)
        logger.debug("Parsed %s", source)
        return document

    def parse_file(self, path: str | Path) -> Document:
        path = Path(path)
        return self.parse(path.read_text(encoding="utf-8"), source=str(path))


@lru_cache(maxsize=1)
def _default_parser() -> TmParser:
    return TmParser()


def parse(text: str, source: str = "<string>") -> Document:
    return _default_parser().parse(text, source)


def parse_file(path: str | Path) -> Document:
    return _default_parser().parse_file(path)
