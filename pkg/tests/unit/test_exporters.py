"""Unit tests for JSON and DOT export (``thimac_cli.dsl.exporters``)."""

from __future__ import annotations

import json

import pytest
from lark import Lark

from thimac_cli.catalog import registry
from thimac_cli.dsl.document import Document
from thimac_cli.dsl.exporters import TM_VERSION, ExportLevel, document_to_dict, export_dot, export_json
from thimac_cli.model.errors import UnsupportedLevelError

# Just enough of the DOT language to check that exports are well formed.
_DOT_GRAMMAR = r"""
start: "digraph" ID "{" stmt* "}"
?stmt: subgraph | edge_stmt | node_stmt | attr_stmt
subgraph: "subgraph" ID "{" stmt* "}"
edge_stmt: ID "->" ID attrs? ";"
node_stmt: ID attrs ";"
attr_stmt: ID "=" ID ";"
attrs: "[" attr ("," attr)* "]"
attr: ID "=" ID
ID: /"(\\.|[^"\\])*"/ | /[A-Za-z_][A-Za-z0-9_]*/
%import common.WS
%ignore WS
"""

_dot = Lark(_DOT_GRAMMAR, parser="lalr")


def _edges(dot: str) -> list[str]:
    return [line.strip() for line in dot.splitlines() if "->" in line]


class TestExportJson:
    def test_version_and_sections(self) -> None:
        data = json.loads(export_json(registry.load("inventory")))
        assert data["tm_version"] == TM_VERSION == 1
        assert {t["name"] for t in data["thimacs"]} == {"Customer", "Shop", "Inventory", "Supplier"}
        assert [e["id"] for e in data["events"]][:3] == ["E1", "E2", "E3"]

    def test_revert_edge_kind(self) -> None:
        data = document_to_dict(registry.load("inventory"))
        negative = [(e["source"], e["target"]) for e in data["edges"] if e["kind"] == "negative"]
        assert ("E14", "E1") in negative

    def test_guards_and_effects_as_source(self) -> None:
        data = document_to_dict(registry.load("inventory"))
        e8 = next(e for e in data["events"] if e["id"] == "E8")
        assert e8["effects"] == [{"target": "Inventory", "expr": "Inventory - Quantity"}]
        guards = {(e["source"], e["target"]): e["guard"] for e in data["edges"]}
        assert guards[("E4", "E5")] == "Quantity <= Inventory"

    def test_timeline_anchor(self) -> None:
        data = document_to_dict(registry.load("clinical"))
        (timeline,) = data["timelines"]
        e4 = next(e for e in timeline["events"] if e["id"] == "E4")
        assert e4["anchor"] == {"kind": "interval", "start": "2019-03-04", "end": "2019-03-12"}
        assert e4["category"] == "medication"

    def test_queue_stimuli(self) -> None:
        data = document_to_dict(registry.load("queue"))
        (scenario,) = data["scenarios"]
        assert scenario["stimuli"][0] == {"queue": "Q", "signal": "arrive", "item": "o1", "at": 0}
        assert scenario["stimuli"][2] == {"queue": "Q", "signal": "free", "at": 2}

    def test_empty_document(self) -> None:
        data = document_to_dict(Document())
        assert data["tm_version"] == TM_VERSION
        assert data["thimacs"] == []


class TestExportDot:
    @pytest.mark.parametrize("name", registry.CATALOG)
    @pytest.mark.parametrize("level", list(ExportLevel))
    def test_output_is_well_formed(self, name: str, level: ExportLevel) -> None:
        _dot.parse(export_dot(registry.load(name), level, name=name))

    def test_simplified_output_is_well_formed(self) -> None:
        _dot.parse(export_dot(registry.load("inventory"), "static", simplified=True))

    def test_nested_clusters(self) -> None:
        dot = export_dot(registry.load("socrates"), ExportLevel.STATIC, name="socrates")
        assert dot.startswith('digraph "socrates" {')
        assert 'subgraph "cluster_Socrates" {' in dot
        assert 'subgraph "cluster_Walk" {' in dot
        assert dot.index("cluster_Socrates") < dot.index("cluster_Walk")

    def test_trigger_arcs_are_dashed(self) -> None:
        dot = export_dot(registry.load("socrates"), "static")
        assert '"Socrates.create" -> "Walk.create" [style=dashed];' in _edges(dot)

    def test_revert_edge_has_diamond_tail(self) -> None:
        dot = export_dot(registry.load("inventory"), "behavior")
        assert '"E14" -> "E1" [dir=both, arrowtail=diamond, arrowhead=normal];' in _edges(dot)

    def test_guarded_edge_is_labelled(self) -> None:
        dot = export_dot(registry.load("inventory"), "behavior")
        assert '"E4" -> "E5" [label="Quantity <= Inventory"];' in _edges(dot)

    def test_simplified_has_no_transfers(self) -> None:
        dot = export_dot(registry.load("inventory"), "static", simplified=True)
        assert "transfer" not in dot
        assert "style=bold" in dot

    def test_empty_document(self) -> None:
        assert export_dot(Document(), "static") == 'digraph "model" {\n}\n'
        assert export_dot(Document(), "behavior") == 'digraph "model" {\n}\n'

    def test_names_are_quoted(self) -> None:
        dot = export_dot(Document(), "static", name='a "b"')
        assert dot.startswith('digraph "a \\"b\\"" {')

    def test_unknown_level(self) -> None:
        with pytest.raises(UnsupportedLevelError):
            export_dot(Document(), "png")
