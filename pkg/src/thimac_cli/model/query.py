"""The timeline query language: ``when(ID)``, ``relation(ID, ID)``, ``starts_before(ID, ID)`` and ``before(ID)``."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from lark import Lark, Transformer, UnexpectedEOF, UnexpectedInput

from .errors import QuerySyntaxError
from .timeline import ClinicalEvent, TemporalRelation, TimeAnchor, Timeline, events_before, relation, starts_before, when

QUERY_GRAMMAR = r"""
?start: when_query | relation_query | starts_before_query | before_query

when_query: "when" "(" ID ")"
relation_query: "relation" "(" ID "," ID ")"
starts_before_query: "starts_before" "(" ID "," ID ")"
before_query: "before" "(" ID ")"

ID: /[A-Za-z_][A-Za-z0-9_]*/

%import common.WS
%ignore WS
"""


@dataclass(frozen=True)
class WhenQuery:
    event: str

    def __str__(self) -> str:
        return f"when({self.event})"


@dataclass(frozen=True)
class RelationQuery:
    first: str
    second: str

    def __str__(self) -> str:
        return f"relation({self.first}, {self.second})"


@dataclass(frozen=True)
class StartsBeforeQuery:
    first: str
    second: str

    def __str__(self) -> str:
        return f"starts_before({self.first}, {self.second})"


@dataclass(frozen=True)
class BeforeQuery:
    event: str

    def __str__(self) -> str:
        return f"before({self.event})"


Query = Union[WhenQuery, RelationQuery, StartsBeforeQuery, BeforeQuery]
Answer = Union[TimeAnchor, TemporalRelation, bool, None, list[ClinicalEvent]]


class _ToQuery(Transformer):
    def when_query(self, items):  # noqa: ANN001, ANN201
        return WhenQuery(str(items[0]))

    def relation_query(self, items):  # noqa: ANN001, ANN201
        return RelationQuery(str(items[0]), str(items[1]))

    def starts_before_query(self, items):  # noqa: ANN001, ANN201
        return StartsBeforeQuery(str(items[0]), str(items[1]))

    def before_query(self, items):  # noqa: ANN001, ANN201
        return BeforeQuery(str(items[0]))


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(QUERY_GRAMMAR, parser="lalr", transformer=_ToQuery())


def parse_query(text: str) -> Query:
    """Parse one query. Raises QuerySyntaxError with a 1-based column."""
    try:
        return _parser().parse(text)
    except UnexpectedEOF:
        raise QuerySyntaxError("query ends early", len(text.rstrip()) + 1) from None
    except UnexpectedInput as exc:
        column = exc.column if isinstance(exc.column, int) and exc.column > 0 else 1
        raise QuerySyntaxError(
            "expected when(ID), relation(ID, ID), starts_before(ID, ID) or before(ID)", column
        ) from None


def evaluate(timeline: Timeline, query: Query) -> Answer:
    if isinstance(query, WhenQuery):
        return when(timeline, query.event)
    if isinstance(query, RelationQuery):
        return relation(timeline.get(query.first), timeline.get(query.second))
    if isinstance(query, StartsBeforeQuery):
        return starts_before(timeline.get(query.first), timeline.get(query.second))
    return events_before(timeline, query.event)


def format_answer(answer: Answer) -> str:
    """Anchors in DSL syntax, relations by name, true/false/unknown, or one event id per line."""
    if isinstance(answer, TimeAnchor):
        return str(answer)
    if isinstance(answer, TemporalRelation):
        return answer.value
    if answer is None:
        return "unknown"
    if isinstance(answer, bool):
        return "true" if answer else "false"
    return "\n".join(event.id for event in answer)
