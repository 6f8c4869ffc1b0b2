"""Clinical timelines and the interval relations between their events.

Anchors hold ISO-8601 dates or datetimes as written. Comparisons convert
them to fractional day numbers, so a date compares as midnight of that day.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from functools import cached_property

from .errors import Rule, SemanticError, SourceSpan, UnknownEventError, Violation


class AnchorKind(str, Enum):
    INSTANT = "instant"
    INTERVAL = "interval"
    AFTER = "after"
    UNKNOWN = "unknown"


def moment(text: str) -> float:
    """Day number of an ISO date or datetime. Raises ValueError on anything else."""
    parsed = datetime.fromisoformat(text)
    seconds = parsed.hour * 3600 + parsed.minute * 60 + parsed.second + parsed.microsecond / 1e6
    return parsed.toordinal() + seconds / 86400


@dataclass(frozen=True)
class TimeAnchor:
    kind: AnchorKind
    start: str | None = None
    end: str | None = None

    @classmethod
    def instant(cls, when: str) -> TimeAnchor:
        return cls(AnchorKind.INSTANT, when, when)

    @classmethod
    def interval(cls, start: str, end: str) -> TimeAnchor:
        return cls(AnchorKind.INTERVAL, start, end)

    @classmethod
    def after(cls, bound: str) -> TimeAnchor:
        return cls(AnchorKind.AFTER, bound)

    @classmethod
    def unknown(cls) -> TimeAnchor:
        return cls(AnchorKind.UNKNOWN)

    @property
    def known(self) -> bool:
        return self.kind in (AnchorKind.INSTANT, AnchorKind.INTERVAL)

    def problem(self) -> str | None:
        """Why this anchor is malformed, or None."""
        if self.kind is AnchorKind.UNKNOWN:
            return None
        texts = [self.start] if self.kind is AnchorKind.AFTER else [self.start, self.end]
        for text in texts:
            if text is None:
                return f"{self.kind.value} anchor is missing a time"
            try:
                moment(text)
            except ValueError:
                return f"'{text}' is not an ISO-8601 date or datetime"
        if self.kind is AnchorKind.INTERVAL and moment(self.start) > moment(self.end):  # type: ignore[arg-type]
            return f"interval starts at {self.start} after it ends at {self.end}"
        return None

    def bounds(self) -> tuple[float, float]:
        """Numeric start and end of a fully known anchor."""
        if not self.known:
            raise ValueError(f"{self.kind.value} anchor has no bounds")
        return moment(self.start), moment(self.end)  # type: ignore[arg-type]

    def to_dict(self) -> dict:
        if self.kind is AnchorKind.INSTANT:
            return {"kind": self.kind.value, "t": self.start}
        if self.kind is AnchorKind.INTERVAL:
            return {"kind": self.kind.value, "start": self.start, "end": self.end}
        if self.kind is AnchorKind.AFTER:
            return {"kind": self.kind.value, "t": self.start}
        return {"kind": self.kind.value}

    @classmethod
    def from_dict(cls, data: dict) -> TimeAnchor:
        kind = AnchorKind(data["kind"])
        if kind is AnchorKind.INSTANT:
            return cls.instant(data["t"])
        if kind is AnchorKind.INTERVAL:
            return cls.interval(data["start"], data["end"])
        if kind is AnchorKind.AFTER:
            return cls.after(data["t"])
        return cls.unknown()

    def __str__(self) -> str:
        if self.kind is AnchorKind.INSTANT:
            return f"at {self.start}"
        if self.kind is AnchorKind.INTERVAL:
            return f"from {self.start} to {self.end}"
        if self.kind is AnchorKind.AFTER:
            return f"after {self.start}"
        return "unknown"


class Category(str, Enum):
    ADMISSION = "admission"
    MEDICATION = "medication"
    LAB_RESULT = "lab_result"
    DIAGNOSIS = "diagnosis"
    PROCEDURE = "procedure"
    OTHER = "other"


@dataclass(frozen=True)
class ClinicalEvent:
    id: str
    label: str
    anchor: TimeAnchor
    category: Category = Category.OTHER
    note: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Timeline:
    name: str
    events: tuple[ClinicalEvent, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)

    @cached_property
    def event_index(self) -> dict[str, ClinicalEvent]:
        return {e.id: e for e in self.events}

    def get(self, event_id: str) -> ClinicalEvent:
        try:
            return self.event_index[event_id]
        except KeyError:
            raise UnknownEventError(event_id, f"timeline {self.name}") from None


def check_timeline(timeline: Timeline) -> list[Violation]:
    violations = []
    seen: set[str] = set()
    for event in timeline.events:
        if event.id in seen:
            violations.append(
                Violation(Rule.DUPLICATE_ID, f"event '{event.id}' appears twice in timeline {timeline.name}", event.id, event.span)
            )
        seen.add(event.id)
        problem = event.anchor.problem()
        if problem:
            violations.append(Violation(Rule.INVALID_ANCHOR, f"event {event.id}: {problem}", event.id, event.span))
    return violations


# ---------------------------------------------------------------------------
# Relations
# ---------------------------------------------------------------------------


class TemporalRelation(str, Enum):
    BEFORE = "Before"
    AFTER = "After"
    MEETS = "Meets"
    MET_BY = "MetBy"
    OVERLAPS = "Overlaps"
    OVERLAPPED_BY = "OverlappedBy"
    STARTS = "Starts"
    STARTED_BY = "StartedBy"
    DURING = "During"
    CONTAINS = "Contains"
    FINISHES = "Finishes"
    FINISHED_BY = "FinishedBy"
    EQUALS = "Equals"
    UNKNOWN = "Unknown"

    @property
    def converse(self) -> TemporalRelation:
        return _CONVERSE[self]


_CONVERSE = {
    TemporalRelation.BEFORE: TemporalRelation.AFTER,
    TemporalRelation.AFTER: TemporalRelation.BEFORE,
    TemporalRelation.MEETS: TemporalRelation.MET_BY,
    TemporalRelation.MET_BY: TemporalRelation.MEETS,
    TemporalRelation.OVERLAPS: TemporalRelation.OVERLAPPED_BY,
    TemporalRelation.OVERLAPPED_BY: TemporalRelation.OVERLAPS,
    TemporalRelation.STARTS: TemporalRelation.STARTED_BY,
    TemporalRelation.STARTED_BY: TemporalRelation.STARTS,
    TemporalRelation.DURING: TemporalRelation.CONTAINS,
    TemporalRelation.CONTAINS: TemporalRelation.DURING,
    TemporalRelation.FINISHES: TemporalRelation.FINISHED_BY,
    TemporalRelation.FINISHED_BY: TemporalRelation.FINISHES,
    TemporalRelation.EQUALS: TemporalRelation.EQUALS,
    TemporalRelation.UNKNOWN: TemporalRelation.UNKNOWN,
}


def classify(a: tuple[float, float], b: tuple[float, float]) -> TemporalRelation:
    """Interval relation of ``a`` to ``b``; instants are intervals with start == end."""
    s1, e1 = a
    s2, e2 = b
    if s1 == s2 and e1 == e2:
        return TemporalRelation.EQUALS
    if e1 < s2:
        return TemporalRelation.BEFORE
    if e2 < s1:
        return TemporalRelation.AFTER
    if s1 == s2:
        return TemporalRelation.STARTS if e1 < e2 else TemporalRelation.STARTED_BY
    if e1 == e2:
        return TemporalRelation.FINISHES if s1 > s2 else TemporalRelation.FINISHED_BY
    if e1 == s2:
        return TemporalRelation.MEETS
    if e2 == s1:
        return TemporalRelation.MET_BY
    if s1 > s2 and e1 < e2:
        return TemporalRelation.DURING
    if s1 < s2 and e1 > e2:
        return TemporalRelation.CONTAINS
    return TemporalRelation.OVERLAPS if s1 < s2 else TemporalRelation.OVERLAPPED_BY


def _probe(lower: float, points: Iterable[float]) -> list[float]:
    """Representative values strictly above ``lower`` relative to ``points``."""
    above = sorted({p for p in points if p > lower})
    if not above:
        return [lower + 1]
    probes = []
    previous = lower
    for point in above:
        probes.extend(((previous + point) / 2, point))
        previous = point
    probes.append(above[-1] + 1)
    return probes


def _completions(anchor: TimeAnchor, points: tuple[float, ...]) -> Iterator[tuple[float, float]]:
    """Every qualitatively distinct known interval an After anchor could stand for."""
    for start in _probe(moment(anchor.start), points):  # type: ignore[arg-type]
        yield start, start
        for end in _probe(start, points):
            yield start, end


def relation(a: ClinicalEvent, b: ClinicalEvent) -> TemporalRelation:
    """Relation of ``a`` to ``b``. Unknown unless every completion of missing endpoints agrees."""
    if a == b:
        return TemporalRelation.EQUALS
    if AnchorKind.UNKNOWN in (a.anchor.kind, b.anchor.kind):
        return TemporalRelation.UNKNOWN
    if a.anchor.known and b.anchor.known:
        return classify(a.anchor.bounds(), b.anchor.bounds())
    if not a.anchor.known and not b.anchor.known:
        return TemporalRelation.UNKNOWN
    if a.anchor.known:
        return relation(b, a).converse
    fixed = b.anchor.bounds()
    found = {classify(candidate, fixed) for candidate in _completions(a.anchor, fixed)}
    return found.pop() if len(found) == 1 else TemporalRelation.UNKNOWN


def starts_before(a: ClinicalEvent, b: ClinicalEvent) -> bool | None:
    """Whether ``a`` starts strictly before ``b``. None when the anchors cannot decide."""
    if AnchorKind.UNKNOWN in (a.anchor.kind, b.anchor.kind):
        return None
    start_a = moment(a.anchor.start)  # type: ignore[arg-type]
    start_b = moment(b.anchor.start)  # type: ignore[arg-type]
    if a.anchor.known and b.anchor.known:
        return start_a < start_b
    if a.anchor.known:
        # b starts somewhere after its bound
        return True if start_a <= start_b else None
    if b.anchor.known:
        return False if start_a >= start_b else None
    return None


def natural_key(event_id: str) -> tuple:
    """Sort key placing E2 before E10."""
    return tuple(int(part) if part.isdigit() else part for part in re.split(r"(\d+)", event_id))


def events_before(timeline: Timeline, event_id: str) -> list[ClinicalEvent]:
    """Events of ``timeline`` that certainly start before ``event_id``, by start then id."""
    target = timeline.get(event_id)
    found = [
        e
        for e in timeline.events
        if e.id != target.id and starts_before(e, target) is True and relation(e, target) is not TemporalRelation.UNKNOWN
    ]
    return sorted(found, key=lambda e: (moment(e.anchor.start), natural_key(e.id)))  # type: ignore[arg-type]


def when(timeline: Timeline, event_id: str) -> TimeAnchor:
    return timeline.get(event_id).anchor


# ---------------------------------------------------------------------------
# JSON-lines import
# ---------------------------------------------------------------------------


def timeline_from_jsonl(text: str, name: str, file: str = "<timeline>") -> Timeline:
    """Read one ``{id, label, category, anchor}`` object per line.

    Raises SemanticError listing every malformed line.
    """
    events: list[ClinicalEvent] = []
    violations: list[Violation] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        span = SourceSpan(file, number, 1)
        try:
            data = json.loads(line)
            event_id = data["id"]
            anchor = TimeAnchor.from_dict(data["anchor"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            violations.append(Violation(Rule.SYNTAX_ERROR, f"unreadable timeline entry: {exc}", "", span))
            continue
        try:
            category = Category(data.get("category", Category.OTHER.value))
        except ValueError:
            violations.append(Violation(Rule.UNKNOWN_CATEGORY, f"event {event_id}: unknown category '{data['category']}'", event_id, span))
            continue
        events.append(ClinicalEvent(event_id, data.get("label", event_id), anchor, category, data.get("note"), span))

    timeline = Timeline(name, tuple(events))
    violations.extend(check_timeline(timeline))
    if violations:
        raise SemanticError(violations)
    return timeline


def timeline_to_jsonl(timeline: Timeline) -> str:
    lines = []
    for event in timeline.events:
        data = {"id": event.id, "label": event.label, "category": event.category.value, "anchor": event.anchor.to_dict()}
        if event.note:
            data["note"] = event.note
        lines.append(json.dumps(data, ensure_ascii=False))
    return "".join(f"{line}\n" for line in lines)
