"""Bundled example models and their golden traces and query answers.

Each entry is a ``<name>.tm`` source under ``data/`` with a sibling
``<name>.expected.json`` holding the expected output of every scenario and
query the entry ships with.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..dsl.builder import Bundle, build_document
from ..dsl.document import Document, ScenarioDecl
from ..dsl.parser import parse
from ..model.engine import EventStimulus, HaltReason, QueueStimulus, Trace, TraceRecord
from ..model.errors import UnknownEntryError
from ..model.oracle import canonical_trace, queue_trace

logger = logging.getLogger(__name__)

CATALOG = ("socrates", "inventory", "queue", "clinical")


@dataclass(frozen=True)
class ScenarioGolden:
    scenario: ScenarioDecl
    trace: Trace


@dataclass(frozen=True)
class QueryGolden:
    timeline: str
    query: str
    answer: str


def names() -> tuple[str, ...]:
    return CATALOG


def _data():  # noqa: ANN202
    return resources.files("thimac_cli.catalog") / "data"


def _check(name: str) -> None:
    if name not in CATALOG:
        raise UnknownEntryError(f"no catalog entry named '{name}' (known: {', '.join(CATALOG)})")


def fixture_path(name: str) -> Path:
    """Filesystem path of the ``.tm`` source of ``name``."""
    _check(name)
    return Path(str(_data() / f"{name}.tm"))


def source(name: str) -> str:
    _check(name)
    return (_data() / f"{name}.tm").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_bundle(name: str) -> Bundle:
    _check(name)
    logger.debug("Loading catalog entry %s", name)
    return build_document(parse(source(name), f"{name}.tm"))


def load(name: str) -> Document:
    """Parsed and validated document of catalog entry ``name``."""
    return load_bundle(name).document


def expected(name: str) -> dict:
    _check(name)
    return json.loads((_data() / f"{name}.expected.json").read_text(encoding="utf-8"))


def scenarios(name: str) -> list[ScenarioGolden]:
    """Every scenario of ``name`` paired with its golden trace, in declaration order."""
    goldens = expected(name)["scenarios"]
    pairs = []
    for scenario in load(name).scenarios:
        golden = goldens[scenario.name]
        trace = Trace(
            records=[TraceRecord.from_dict(record) for record in golden["trace"]],
            halted=HaltReason(golden["halted"]),
        )
        trace.steps = len({record.step for record in trace.records})
        pairs.append(ScenarioGolden(scenario, trace))
    return pairs


def queries(name: str) -> list[QueryGolden]:
    return [QueryGolden(q["timeline"], q["query"], q["answer"]) for q in expected(name)["queries"]]


# ---------------------------------------------------------------------------
# Regenerating goldens
# ---------------------------------------------------------------------------


def reference_trace(bundle: Bundle, scenario: ScenarioDecl) -> Trace:
    """Trace of ``scenario`` computed by the oracle rather than the engine."""
    events = [s for s in scenario.stimuli if isinstance(s, EventStimulus)]
    signals = [s for s in scenario.stimuli if isinstance(s, QueueStimulus)]
    if not signals:
        return canonical_trace(bundle.behavior, scenario.binding_map(), events)
    if events or any(not e.external for e in bundle.behavior.events):
        raise ValueError(f"scenario '{scenario.name}' mixes queue signals with event behavior")
    return queue_trace(bundle.queues, signals)


def render_expected(name: str) -> str:
    """Golden file text for ``name``: oracle traces for every scenario, current query answers."""
    bundle = load_bundle(name)
    answered = expected(name)["queries"]
    blocks = []
    for scenario in bundle.scenarios:
        trace = reference_trace(bundle, scenario)
        records = ",\n".join(f"        {record.to_json()}" for record in trace.records)
        body = f"[\n{records}\n      ]" if records else "[]"
        halted = trace.halted.value if trace.halted else HaltReason.QUIESCENT.value
        blocks.append(f'    {json.dumps(scenario.name)}: {{\n      "trace": {body},\n      "halted": "{halted}"\n    }}')
    lines = ["{"]
    lines.append('  "scenarios": {\n' + ",\n".join(blocks) + "\n  }," if blocks else '  "scenarios": {},')
    if answered:
        answers = ",\n".join(f"    {json.dumps(q, ensure_ascii=False)}" for q in answered)
        lines.append(f'  "queries": [\n{answers}\n  ]')
    else:
        lines.append('  "queries": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def expected_path(name: str) -> Path:
    _check(name)
    return Path(str(_data() / f"{name}.expected.json"))


def regenerate(name: str) -> bool:
    """Rewrite the golden file of ``name``. Returns whether its content changed."""
    text = render_expected(name)
    path = expected_path(name)
    changed = json.loads(text) != expected(name)
    path.write_text(text, encoding="utf-8")
    logger.info("Regenerated %s (%s)", path, "changed" if changed else "unchanged")
    return changed
