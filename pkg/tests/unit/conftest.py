"""Fixtures for direct unit tests (no CliRunner).

These fixtures build models and behavior graphs from the catalog so tests can
exercise the engine and queries in isolation.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from thimac_cli.catalog import registry
from thimac_cli.dsl.builder import Bundle, build_document
from thimac_cli.dsl.parser import parse

_FIXTURES_DIR = Path(__file__).parent.parent / "fixtures"


@pytest.fixture
def load_test_data():  # noqa: ANN201
    """Load a JSON fixture from the fixtures directory by relative path."""

    def _load(relative_path: str) -> dict | list:
        path = _FIXTURES_DIR / relative_path
        return json.loads(path.read_text())

    return _load


@pytest.fixture
def fixture_text():  # noqa: ANN201
    """Read a text fixture from the fixtures directory by relative path."""

    def _read(relative_path: str) -> str:
        return (_FIXTURES_DIR / relative_path).read_text()

    return _read


@pytest.fixture
def inventory() -> Bundle:
    """The inventory catalog entry, built."""
    return registry.load_bundle("inventory")


@pytest.fixture
def socrates() -> Bundle:
    return registry.load_bundle("socrates")


@pytest.fixture
def build():  # noqa: ANN201
    """Return a callable that parses and builds a ``.tm`` source string."""

    def _build(text: str) -> Bundle:
        return build_document(parse(text))

    return _build
