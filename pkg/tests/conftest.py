"""Root conftest. Fixtures defined here are available to both cli/ and unit/ tests."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from thimac_cli.catalog import registry


# ---------------------------------------------------------------------------
# Home directory isolation
# ---------------------------------------------------------------------------


@pytest.fixture(autouse=True)
def isolated_home(tmp_path_factory: pytest.TempPathFactory, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Point ``Path.home()`` at a scratch directory so no test reads or writes the real config file."""
    home = tmp_path_factory.mktemp("home")
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.setenv("USERPROFILE", str(home))
    monkeypatch.delenv("TM_COLOR", raising=False)
    return home


# ---------------------------------------------------------------------------
# Config file
# ---------------------------------------------------------------------------


@pytest.fixture
def write_config_file(isolated_home: Path):  # noqa: ANN201
    """Factory fixture that writes a config file under the isolated home directory.

    Accepts either a dict (dumped as JSON) or a raw string. Returns the path.

    Example::

        def test_show(invoke, write_config_file):
            write_config_file({"max_steps": 5})
    """

    def _write(contents: dict | str) -> Path:
        path = isolated_home / ".config" / "thimac-cli" / "config.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(contents if isinstance(contents, str) else json.dumps(contents))
        return path

    return _write


# ---------------------------------------------------------------------------
# Catalog documents on disk
# ---------------------------------------------------------------------------


@pytest.fixture
def catalog_file():  # noqa: ANN201
    """Return a callable that resolves a catalog entry name to its ``.tm`` file path."""

    def _path(name: str) -> str:
        return str(registry.fixture_path(name))

    return _path


@pytest.fixture
def write_document(tmp_path: Path):  # noqa: ANN201
    """Factory fixture that writes ``text`` to ``tmp_path / name`` and returns the path as a string."""

    def _write(text: str, name: str = "model.tm") -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write


@pytest.fixture
def fixture_file():  # noqa: ANN201
    """Return a callable that resolves a path relative to ``tests/fixtures`` to a string path."""
    fixtures_dir = Path(__file__).parent / "fixtures"

    def _path(relative_path: str) -> str:
        return str(fixtures_dir / relative_path)

    return _path
