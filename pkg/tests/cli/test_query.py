"""CLI integration tests for the ``query`` command."""

from __future__ import annotations

from typing import TYPE_CHECKING

import pytest

from thimac_cli.catalog import registry

if TYPE_CHECKING:
    from tests.cli.conftest import InvokeHelper

_GOLDENS = registry.queries("clinical")


class TestQueryCatalog:
    @pytest.mark.parametrize("golden", _GOLDENS, ids=[g.query for g in _GOLDENS])
    def test_clinical_answers(self, invoke: InvokeHelper, catalog_file, golden) -> None:  # noqa: ANN001
        result = invoke(["query", catalog_file("clinical"), golden.query, "--timeline", golden.timeline])
        assert result.exit_code == 0
        assert result.output == f"{golden.answer}\n"

    def test_single_timeline_is_picked(self, invoke: InvokeHelper, catalog_file) -> None:  # noqa: ANN001
        result = invoke(["query", catalog_file("clinical"), "when(E4)"])
        assert result.output == "from 2019-03-04 to 2019-03-12\n"


class TestQueryErrors:
    def test_syntax_error(self, invoke: InvokeHelper, catalog_file) -> None:  # noqa: ANN001
        result = invoke(["query", catalog_file("clinical"), "when(E1 @)"])
        assert result.exit_code == 2
        assert result.stderr.startswith("Error: QuerySyntaxError at column 9")

    def test_unknown_event(self, invoke: InvokeHelper, catalog_file) -> None:  # noqa: ANN001
        result = invoke(["query", catalog_file("clinical"), "relation(E1, E42)"])
        assert result.exit_code == 2
        assert "no event named 'E42'" in result.stderr

    def test_unknown_timeline(self, invoke: InvokeHelper, catalog_file) -> None:  # noqa: ANN001
        result = invoke(["query", catalog_file("clinical"), "when(E1)", "--timeline", "other"])
        assert result.exit_code == 2
        assert "no timeline named 'other'" in result.stderr

    def test_document_without_timeline(self, invoke: InvokeHelper, catalog_file) -> None:  # noqa: ANN001
        result = invoke(["query", catalog_file("socrates"), "when(E1)"])
        assert result.exit_code == 2
        assert "declares no timeline" in result.stderr

    def test_several_timelines(self, invoke: InvokeHelper, write_document) -> None:  # noqa: ANN001
        path = write_document(
            "timeline a {\n  event E1 \"x\" at 2020-01-01\n}\ntimeline b {\n  event E1 \"y\" at 2020-01-02\n}\n"
        )
        result = invoke(["query", path, "when(E1)"])
        assert result.exit_code == 2
        assert "several timelines (a, b)" in result.stderr
        assert invoke(["query", path, "when(E1)", "--timeline", "b"]).output == "at 2020-01-02\n"


class TestQueryJsonLines:
    def test_before(self, invoke: InvokeHelper, fixture_file) -> None:  # noqa: ANN001
        result = invoke(["query", fixture_file("timelines/case.jsonl"), "before(E3)"])
        assert result.exit_code == 0
        assert result.output == "E1\nE2\n"

    @pytest.mark.parametrize(
        ("query", "answer"),
        [("relation(E3, E2)", "During"), ("starts_before(E4, E1)", "false"), ("relation(E5, E1)", "Unknown")],
    )
    def test_answers(self, invoke: InvokeHelper, fixture_file, query: str, answer: str) -> None:  # noqa: ANN001
        assert invoke(["query", fixture_file("timelines/case.jsonl"), query]).output == f"{answer}\n"

    def test_broken_timeline(self, invoke: InvokeHelper, fixture_file) -> None:  # noqa: ANN001
        path = fixture_file("timelines/broken.jsonl")
        result = invoke(["query", path, "when(E1)"])
        assert result.exit_code == 1
        assert f"{path}:2:1 InvalidAnchor" in result.stderr
