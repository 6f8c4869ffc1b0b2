from __future__ import annotations

import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thimac_cli.catalog import registry
from thimac_cli.model.errors import Rule, SemanticError, UnknownEventError
from thimac_cli.model.timeline import (
    AnchorKind,
    Category,
    ClinicalEvent,
    TemporalRelation,
    TimeAnchor,
    Timeline,
    check_timeline,
    classify,
    events_before,
    moment,
    natural_key,
    relation,
    starts_before,
    timeline_from_jsonl,
    timeline_to_jsonl,
    when,
)

R = TemporalRelation


def _event(event_id: str, anchor: TimeAnchor) -> ClinicalEvent:
    return ClinicalEvent(event_id, event_id, anchor)


def _day(day: int) -> str:
    return f"2024-03-{day:02d}"


def _reference(a: tuple[int, int], b: tuple[int, int]) -> list[TemporalRelation]:
    """Every relation whose defining endpoint condition holds for two proper intervals."""
    (s1, e1), (s2, e2) = a, b
    conditions = {
        R.EQUALS: s1 == s2 and e1 == e2,
        R.BEFORE: e1 < s2,
        R.AFTER: e2 < s1,
        R.MEETS: e1 == s2,
        R.MET_BY: e2 == s1,
        R.STARTS: s1 == s2 and e1 < e2,
        R.STARTED_BY: s1 == s2 and e1 > e2,
        R.FINISHES: e1 == e2 and s1 > s2,
        R.FINISHED_BY: e1 == e2 and s1 < s2,
        R.DURING: s1 > s2 and e1 < e2,
        R.CONTAINS: s1 < s2 and e1 > e2,
        R.OVERLAPS: s1 < s2 < e1 < e2,
        R.OVERLAPPED_BY: s2 < s1 < e2 < e1,
    }
    return [rel for rel, holds in conditions.items() if holds]


_PROPER = [(s, e) for s in range(6) for e in range(s + 1, 6)]
_ALL = [(s, e) for s in range(6) for e in range(s, 6)]

_intervals = st.tuples(st.integers(0, 40), st.integers(0, 40)).map(sorted).map(tuple)


# ===========================================================================
# classify
# ===========================================================================


class TestClassify:
    def test_proper_intervals_match_endpoint_definitions(self) -> None:
        seen = set()
        for a, b in itertools.product(_PROPER, repeat=2):
            expected = _reference(a, b)
            assert len(expected) == 1, (a, b)
            assert classify(a, b) is expected[0], (a, b)
            seen.add(expected[0])
        assert seen == set(R) - {R.UNKNOWN}

    def test_converse_symmetry_including_instants(self) -> None:
        for a, b in itertools.product(_ALL, repeat=2):
            assert classify(b, a) is classify(a, b).converse, (a, b)

    def test_converse_is_an_involution(self) -> None:
        for rel in R:
            assert rel.converse.converse is rel

    def test_interval_contains_instant(self) -> None:
        interval = TimeAnchor.interval(_day(2), _day(9)).bounds()
        instant = TimeAnchor.instant(_day(5)).bounds()
        assert classify(interval, instant) is R.CONTAINS
        assert classify(instant, interval) is R.DURING

    @pytest.mark.parametrize(
        ("a", "b", "expected"),
        [
            ((1, 1), (1, 1), R.EQUALS),
            ((1, 1), (2, 2), R.BEFORE),
            ((1, 1), (1, 3), R.STARTS),
            ((3, 3), (1, 3), R.FINISHES),
        ],
    )
    def test_instants(self, a: tuple[int, int], b: tuple[int, int], expected: TemporalRelation) -> None:
        assert classify(a, b) is expected

    @given(a=_intervals, b=_intervals)
    def test_before_and_after_are_antisymmetric(self, a: tuple[int, int], b: tuple[int, int]) -> None:
        if classify(a, b) is R.BEFORE:
            assert classify(b, a) is R.AFTER
        assert not (classify(a, b) is R.BEFORE and classify(b, a) is R.BEFORE)

    @given(a=_intervals, b=_intervals, c=_intervals)
    def test_before_is_transitive(self, a: tuple[int, int], b: tuple[int, int], c: tuple[int, int]) -> None:
        if classify(a, b) is R.BEFORE and classify(b, c) is R.BEFORE:
            assert classify(a, c) is R.BEFORE

    @given(a=_intervals, b=_intervals, c=_intervals)
    def test_during_is_transitive(self, a: tuple[int, int], b: tuple[int, int], c: tuple[int, int]) -> None:
        if classify(a, b) is R.DURING and classify(b, c) is R.DURING:
            assert classify(a, c) is R.DURING


# ===========================================================================
# Anchors
# ===========================================================================


class TestAnchors:
    def test_moment_of_date_is_midnight(self) -> None:
        assert moment("2024-03-02") == moment("2024-03-02T00:00:00")
        assert moment("2024-03-02T12:00:00") == moment("2024-03-02") + 0.5

    def test_moment_rejects_garbage(self) -> None:
        with pytest.raises(ValueError):
            moment("yesterday")

    @pytest.mark.parametrize(
        ("anchor", "text"),
        [
            (TimeAnchor.instant("2024-03-01"), "at 2024-03-01"),
            (TimeAnchor.interval("2024-03-01", "2024-03-05"), "from 2024-03-01 to 2024-03-05"),
            (TimeAnchor.after("2024-03-01"), "after 2024-03-01"),
            (TimeAnchor.unknown(), "unknown"),
        ],
    )
    def test_str(self, anchor: TimeAnchor, text: str) -> None:
        assert str(anchor) == text
        assert TimeAnchor.from_dict(anchor.to_dict()) == anchor

    def test_to_dict(self) -> None:
        assert TimeAnchor.instant("2024-03-01").to_dict() == {"kind": "instant", "t": "2024-03-01"}
        assert TimeAnchor.interval("2024-03-01", "2024-03-02").to_dict() == {
            "kind": "interval",
            "start": "2024-03-01",
            "end": "2024-03-02",
        }

    def test_only_instants_and_intervals_are_known(self) -> None:
        assert TimeAnchor.instant(_day(1)).known
        assert not TimeAnchor.after(_day(1)).known
        with pytest.raises(ValueError):
            TimeAnchor.unknown().bounds()

    @pytest.mark.parametrize(
        ("anchor", "fragment"),
        [
            (TimeAnchor.interval(_day(5), _day(2)), "after it ends"),
            (TimeAnchor.instant("March 1st"), "not an ISO-8601"),
            (TimeAnchor(AnchorKind.AFTER), "missing a time"),
        ],
    )
    def test_problem(self, anchor: TimeAnchor, fragment: str) -> None:
        assert fragment in anchor.problem()

    def test_check_timeline(self) -> None:
        timeline = Timeline(
            "t",
            (
                _event("E1", TimeAnchor.instant(_day(1))),
                _event("E1", TimeAnchor.instant(_day(2))),
                _event("E2", TimeAnchor.interval(_day(5), _day(2))),
            ),
        )
        assert [v.rule for v in check_timeline(timeline)] == [Rule.DUPLICATE_ID, Rule.INVALID_ANCHOR]


# ===========================================================================
# Relations between events
# ===========================================================================


class TestRelation:
    def test_same_event_equals_itself(self) -> None:
        event = _event("E1", TimeAnchor.unknown())
        assert relation(event, event) is R.EQUALS

    def test_unknown_anchor(self) -> None:
        a = _event("E1", TimeAnchor.unknown())
        b = _event("E2", TimeAnchor.instant(_day(1)))
        assert relation(a, b) is R.UNKNOWN
        assert relation(b, a) is R.UNKNOWN
        assert starts_before(a, b) is None

    def test_after_anchor_past_a_known_event(self) -> None:
        a = _event("E1", TimeAnchor.after(_day(5)))
        b = _event("E2", TimeAnchor.instant(_day(3)))
        assert relation(a, b) is R.AFTER
        assert relation(b, a) is R.BEFORE

    def test_after_anchor_at_an_instant_is_after(self) -> None:
        a = _event("E1", TimeAnchor.after(_day(3)))
        b = _event("E2", TimeAnchor.instant(_day(3)))
        assert relation(a, b) is R.AFTER

    def test_after_anchor_before_a_known_event_is_undecided(self) -> None:
        a = _event("E1", TimeAnchor.after(_day(1)))
        b = _event("E2", TimeAnchor.instant(_day(9)))
        assert relation(a, b) is R.UNKNOWN

    def test_two_after_anchors(self) -> None:
        a = _event("E1", TimeAnchor.after(_day(1)))
        b = _event("E2", TimeAnchor.after(_day(9)))
        assert relation(a, b) is R.UNKNOWN
        assert starts_before(a, b) is None

    @pytest.mark.parametrize(
        ("a", "b", "expected"),
        [
            (TimeAnchor.instant(_day(1)), TimeAnchor.instant(_day(2)), True),
            (TimeAnchor.instant(_day(2)), TimeAnchor.instant(_day(2)), False),
            (TimeAnchor.interval(_day(2), _day(8)), TimeAnchor.instant(_day(2)), False),
            (TimeAnchor.instant(_day(4)), TimeAnchor.after(_day(4)), True),
            (TimeAnchor.instant(_day(5)), TimeAnchor.after(_day(4)), None),
            (TimeAnchor.after(_day(4)), TimeAnchor.instant(_day(4)), False),
            (TimeAnchor.after(_day(4)), TimeAnchor.instant(_day(9)), None),
        ],
    )
    def test_starts_before(self, a: TimeAnchor, b: TimeAnchor, expected: bool | None) -> None:
        assert starts_before(_event("A", a), _event("B", b)) is expected


class TestTimelineQueries:
    @pytest.fixture
    def timeline(self) -> Timeline:
        return Timeline(
            "t",
            (
                _event("E1", TimeAnchor.instant(_day(1))),
                _event("E2", TimeAnchor.interval(_day(2), _day(9))),
                _event("E3", TimeAnchor.instant(_day(5))),
                _event("E4", TimeAnchor.after(_day(6))),
                _event("E5", TimeAnchor.unknown()),
                _event("E10", TimeAnchor.instant(_day(2))),
            ),
        )

    def test_events_before_known_event(self, timeline: Timeline) -> None:
        assert [e.id for e in events_before(timeline, "E3")] == ["E1", "E2", "E10"]

    def test_events_before_open_ended_event(self, timeline: Timeline) -> None:
        # E2 ends after the bound of E4, so their relation is undecided
        assert [e.id for e in events_before(timeline, "E4")] == ["E1", "E10", "E3"]

    def test_nothing_is_before_an_unknown_event(self, timeline: Timeline) -> None:
        assert events_before(timeline, "E5") == []

    def test_when(self, timeline: Timeline) -> None:
        assert when(timeline, "E4") == TimeAnchor.after(_day(6))

    def test_unknown_event(self, timeline: Timeline) -> None:
        with pytest.raises(UnknownEventError, match="E99"):
            when(timeline, "E99")

    def test_natural_key(self) -> None:
        assert sorted(["E10", "E2", "E1"], key=natural_key) == ["E1", "E2", "E10"]

    def test_clinical_case(self) -> None:
        case = registry.load_bundle("clinical").timeline("case")
        assert relation(case.get("E5"), case.get("E4")) is R.DURING
        assert relation(case.get("E9"), case.get("E8")) is R.AFTER
        assert case.get("E1").category is Category.ADMISSION


# ===========================================================================
# JSON lines
# ===========================================================================


class TestJsonLines:
    def test_read(self) -> None:
        text = (
            '{"id": "E1", "label": "Admitted", "category": "admission", "anchor": {"kind": "instant", "t": "2024-03-01"}}\n'
            "\n"
            '{"id": "E2", "anchor": {"kind": "unknown"}}\n'
        )
        timeline = timeline_from_jsonl(text, "t")
        assert timeline.name == "t"
        assert [e.id for e in timeline.events] == ["E1", "E2"]
        assert timeline.get("E2").label == "E2"
        assert timeline.get("E2").category is Category.OTHER
        assert str(timeline.get("E1").anchor) == "at 2024-03-01"

    def test_catalog_timeline_survives_jsonl(self) -> None:
        case = registry.load_bundle("clinical").timeline("case")
        again = timeline_from_jsonl(timeline_to_jsonl(case), "case")
        assert again == case

    def test_write(self) -> None:
        timeline = Timeline("t", (ClinicalEvent("E1", "Dose", TimeAnchor.after(_day(1)), Category.MEDICATION, "oral"),))
        assert json.loads(timeline_to_jsonl(timeline)) == {
            "id": "E1",
            "label": "Dose",
            "category": "medication",
            "anchor": {"kind": "after", "t": "2024-03-01"},
            "note": "oral",
        }

    def test_every_bad_line_is_reported(self) -> None:
        text = "\n".join(
            [
                "not json",
                '{"id": "E1", "category": "surgery", "anchor": {"kind": "unknown"}}',
                '{"id": "E2", "anchor": {"kind": "interval", "start": "2024-03-05", "end": "2024-03-01"}}',
                '{"label": "no id", "anchor": {"kind": "unknown"}}',
            ]
        )
        with pytest.raises(SemanticError) as exc_info:
            timeline_from_jsonl(text, "t", "case.jsonl")
        violations = exc_info.value.violations
        assert [v.rule for v in violations] == [
            Rule.SYNTAX_ERROR,
            Rule.UNKNOWN_CATEGORY,
            Rule.SYNTAX_ERROR,
            Rule.INVALID_ANCHOR,
        ]
        assert [v.span.line for v in violations] == [1, 2, 4, 3]
        assert str(violations[0].span) == "case.jsonl:1:1"
