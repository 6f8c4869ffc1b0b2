"""Diagnostic records and the exception hierarchy shared by every layer.

Validation never stops at the first problem. Builders collect ``Violation``
records and raise one of the ``ViolationError`` subclasses carrying all of
them, so the CLI can print a complete report.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from enum import Enum


class Rule(str, Enum):
    """Names of every rule a diagnostic can report."""

    # static model
    DUPLICATE_ID = "DuplicateId"
    UNKNOWN_REFERENCE = "UnknownReference"
    CYCLIC_CONTAINMENT = "CyclicContainment"
    ILLEGAL_ADJACENCY = "IllegalAdjacency"
    ILLEGAL_BOUNDARY_CROSSING = "IllegalBoundaryCrossing"
    ILLEGAL_TRIGGER_TARGET = "IllegalTriggerTarget"
    ORPHAN_ACTION = "OrphanAction"
    NOT_VALIDATED = "NotValidated"

    # events
    EMPTY_REGION = "EmptyRegion"
    DISCONNECTED_REGION = "DisconnectedRegion"
    UNKNOWN_ID = "UnknownId"
    UNDECLARED_VARIABLE = "UndeclaredVariable"

    # behavior
    UNKNOWN_EVENT = "UnknownEvent"
    GUARD_TYPE_ERROR = "GuardTypeError"
    NEGATIVE_GUARD = "NegativeGuard"
    ILLEGAL_CYCLE = "IllegalCycle"
    UNGUARDED_BRANCH = "UnguardedBranch"

    # engine
    UNBOUND_VARIABLE = "UnboundVariable"
    EFFECT_TYPE_ERROR = "EffectTypeError"
    BINDING_TYPE_ERROR = "BindingTypeError"
    MISSING_BINDING = "MissingBinding"
    UNKNOWN_QUEUE = "UnknownQueue"

    # documents and timelines
    SYNTAX_ERROR = "SyntaxError"
    DUPLICATE_NAME = "DuplicateName"
    UNKNOWN_CATEGORY = "UnknownCategory"
    INVALID_ANCHOR = "InvalidAnchor"
    QUERY_SYNTAX_ERROR = "QuerySyntaxError"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SourceSpan:
    """Position of a declaration or a parse error. Lines and columns start at 1."""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Violation:
    rule: Rule
    message: str
    subject: str = ""
    span: SourceSpan | None = None
    warning: bool = False

    def __str__(self) -> str:
        return f"{self.rule} {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """Result of a validation pass. Violations are data, not failures."""

    violations: tuple[Violation, ...] = ()

    @property
    def errors(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if not v.warning)

    @property
    def warnings(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.warning)

    @property
    def is_clean(self) -> bool:
        return not self.errors

    def rules(self) -> list[Rule]:
        return [v.rule for v in self.violations]

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)


class ThimacError(Exception):
    """Base class for every error raised by thimac-cli."""


class ViolationError(ThimacError):
    """An error carrying the complete list of violations that caused it."""

    def __init__(self, violations: Iterable[Violation], message: str | None = None) -> None:
        self.violations: tuple[Violation, ...] = tuple(violations)
        if message is None:
            message = "; ".join(str(v) for v in self.violations) or "invalid input"
        super().__init__(message)

    def rules(self) -> list[Rule]:
        return [v.rule for v in self.violations]


class ModelError(ViolationError):
    """build_model found structural violations."""


class NotValidatedError(ViolationError):
    """An operation requiring a well-formed model received one with violations."""


class BehaviorError(ViolationError):
    """build_behavior found violations."""


class SemanticError(ViolationError):
    """A parsed document does not build into a valid model."""


class DslSyntaxError(ViolationError):
    """Source text could not be parsed. Carries every syntax diagnostic."""

    @property
    def diagnostics(self) -> tuple[Violation, ...]:
        return self.violations


class RuleError(ThimacError):
    """An error tied to exactly one rule."""

    def __init__(self, rule: Rule, message: str, subject: str = "") -> None:
        self.rule = rule
        self.subject = subject
        self.message = message
        super().__init__(f"{rule}: {message}")


class EventDefinitionError(RuleError):
    """define_event rejected a region, guard or effect."""


class EvaluationError(RuleError):
    """An expression could not be typed or evaluated."""


class UnknownEventError(RuleError):
    def __init__(self, event_id: str, where: str = "") -> None:
        self.event_id = event_id
        suffix = f" in {where}" if where else ""
        super().__init__(Rule.UNKNOWN_EVENT, f"no event named '{event_id}'{suffix}", subject=event_id)


class UnknownQueueError(RuleError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(Rule.UNKNOWN_QUEUE, f"no queue named '{name}'", subject=name)


class MissingBindingError(RuleError):
    def __init__(self, names: Iterable[str]) -> None:
        self.names: tuple[str, ...] = tuple(sorted(names))
        super().__init__(Rule.MISSING_BINDING, f"no binding for {', '.join(self.names)}", subject=",".join(self.names))


class QuerySyntaxError(ThimacError):
    def __init__(self, message: str, column: int) -> None:
        self.column = column
        super().__init__(f"{Rule.QUERY_SYNTAX_ERROR} at column {column}: {message}")


class UnsupportedLevelError(ThimacError):
    def __init__(self, level: object) -> None:
        self.level = level
        super().__init__(f"unsupported export level '{level}'")


class UnknownEntryError(ThimacError):
    """A name looked up in a catalog, scenario table or timeline table does not exist."""
