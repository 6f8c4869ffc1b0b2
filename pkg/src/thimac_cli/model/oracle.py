"""Brute-force reference semantics for behavior graphs.

Every quantity the engine keeps in mutable state (actualization, fire
counts) is recomputed here from the record history, and every choice point
is explored. ``canonical_trace`` follows the first choice at each point and
must agree with ``engine.run``. ``queue_trace`` replays queue signals over a
plain list.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass

from .behavior import BehaviorGraph, BehaviorEdge
from .engine import EventStimulus, HaltReason, QueueStimulus, RecordKind, Trace, TraceRecord
from .expressions import Value, apply_effects, holds
from .queue import Arrive, DownstreamBusy, QueuePhase, QueueSpec

DEFAULT_PATH_LIMIT = 200_000


@dataclass(frozen=True)
class _Path:
    records: tuple[TraceRecord, ...]
    env: tuple[tuple[str, Value], ...]
    used: frozenset[int]
    clock: int
    steps: int


def _replay_actualized(records: Iterable[TraceRecord]) -> dict[str, int]:
    current: dict[str, int] = {}
    for record in records:
        if record.kind is RecordKind.FIRE:
            current[record.event] = record.step
        elif record.kind is RecordKind.REVERT:
            current.pop(record.event, None)
    return current


def _replay_counts(records: Iterable[TraceRecord]) -> Counter:
    return Counter(r.event for r in records if r.kind is RecordKind.FIRE)


class _Replay:
    """Read-only view of a path, derived from its history."""

    def __init__(self, bg: BehaviorGraph, path: _Path) -> None:
        self.bg = bg
        self.path = path
        self.env = dict(path.env)
        self.actualized = _replay_actualized(path.records)
        self.counts = _replay_counts(path.records)

    def branch_open(self, edge: BehaviorEdge) -> bool:
        if edge.source not in self.actualized:
            return False
        since = self.actualized[edge.source]
        external = self.bg.event(edge.target).external
        for other in self.bg.edges:
            if other.source != edge.source or other.kind is not edge.kind or other.target == edge.target:
                continue
            both_guarded = edge.guard is not None and other.guard is not None
            both_external = external and self.bg.event(other.target).external
            if (both_guarded or both_external) and self.actualized.get(other.target, -1) > since:
                return False
        return holds(edge.guard, self.env)

    def could_occur(self, event_id: str) -> bool:
        if event_id in self.actualized:
            return False
        event = self.bg.event(event_id)
        incoming = [e for e in self.bg.edges if e.target == event_id and e.kind is e.kind.SEQUENCE]
        structural = any(self.branch_open(e) for e in incoming) if incoming else self.counts[event_id] == 0
        return structural and holds(event.guard, self.env)

    def choices(self, stimuli: tuple[EventStimulus, ...]) -> list[tuple[str, object]]:
        due = [
            ("stimulus", i)
            for i, s in enumerate(stimuli)
            if i not in self.path.used and s.at <= self.path.clock and self.could_occur(s.event)
        ]
        if due:
            return due
        return [("fire", e.id) for e in self.bg.events if not e.external and self.could_occur(e.id)]

    def next_jump(self, stimuli: tuple[EventStimulus, ...]) -> int | None:
        future = [
            s.at
            for i, s in enumerate(stimuli)
            if i not in self.path.used and s.at > self.path.clock and self.could_occur(s.event)
        ]
        return min(future) if future else None


def _advance(bg: BehaviorGraph, path: _Path, stimuli: tuple[EventStimulus, ...], choice: tuple[str, object]) -> _Path:
    kind, value = choice
    used = path.used
    records = list(path.records)
    if kind == "stimulus":
        used = used | {value}  # type: ignore[operator]
        event = bg.event(stimuli[value].event)  # type: ignore[index]
        records.append(TraceRecord(path.clock, event.id, RecordKind.STIMULUS))
    else:
        event = bg.event(value)  # type: ignore[arg-type]
    env = dict(path.env)
    written = apply_effects(event.effects, env, bg.model.variable_types)
    records.append(TraceRecord(path.clock, event.id, RecordKind.FIRE, written))
    live = _replay_actualized(records)
    for edge in bg.edges:
        if edge.source == event.id and edge.kind is edge.kind.NEGATIVE and edge.target in live:
            records.append(TraceRecord(path.clock, edge.target, RecordKind.REVERT))
            live.pop(edge.target)
    return _Path(tuple(records), tuple(sorted(env.items())), frozenset(used), path.clock + 1, path.steps + 1)


def _start(bg: BehaviorGraph, bindings: Mapping[str, Value]) -> _Path:
    env = {v.name: v.default for v in bg.model.variables if v.default is not None}
    env.update(bindings)
    return _Path((), tuple(sorted(env.items())), frozenset(), 0, 0)


def _options(bg: BehaviorGraph, path: _Path, stimuli: tuple[EventStimulus, ...]) -> tuple[_Path, list[tuple[str, object]]]:
    """Choices available at ``path``, after jumping the clock if nothing is due."""
    replay = _Replay(bg, path)
    options = replay.choices(stimuli)
    if options:
        return path, options
    jump = replay.next_jump(stimuli)
    if jump is None:
        return path, []
    moved = _Path(path.records, path.env, path.used, jump, path.steps)
    return moved, _Replay(bg, moved).choices(stimuli)


def _walk(
    bg: BehaviorGraph,
    path: _Path,
    stimuli: tuple[EventStimulus, ...],
    max_steps: int,
    first_only: bool,
) -> Iterator[Trace]:
    stack = [path]
    while stack:
        current = stack.pop()
        current, options = _options(bg, current, stimuli)
        if not options or current.steps >= max_steps:
            halted = HaltReason.QUIESCENT if not options else HaltReason.BUDGET
            yield Trace(records=list(current.records), halted=halted, steps=current.steps)
            continue
        if first_only:
            options = options[:1]
        # reversed so the first choice is explored first
        for option in reversed(options):
            stack.append(_advance(bg, current, stimuli, option))


def canonical_trace(
    bg: BehaviorGraph,
    bindings: Mapping[str, Value],
    stimuli: Iterable[EventStimulus] = (),
    max_steps: int = 1000,
) -> Trace:
    """The trace obtained by always taking the earliest stimulus, then the earliest-declared event."""
    ordered = tuple(sorted(stimuli, key=lambda s: s.at))
    return next(_walk(bg, _start(bg, bindings), ordered, max_steps, first_only=True))


def enumerate_traces(
    bg: BehaviorGraph,
    bindings: Mapping[str, Value],
    max_steps: int,
    stimuli: Iterable[EventStimulus] = (),
    *,
    limit: int = DEFAULT_PATH_LIMIT,
) -> list[Trace]:
    """Every distinct trace reachable under any interleaving, up to ``limit`` complete paths."""
    ordered = tuple(sorted(stimuli, key=lambda s: s.at))
    seen: dict[tuple[str, HaltReason | None], Trace] = {}
    for count, trace in enumerate(_walk(bg, _start(bg, bindings), ordered, max_steps, first_only=False), start=1):
        seen.setdefault((trace.to_jsonl(), trace.halted), trace)
        if count >= limit:
            break
    return list(seen.values())


def _queue_phases(name: str, items: list[str], flags: dict[str, bool], signal: object) -> tuple[list[tuple[QueuePhase, dict]], list[str]]:
    def flags_now() -> dict:
        return {f"{name}.length": len(items), f"{name}.empty": flags["empty"], f"{name}.busy": flags["busy"]}

    if isinstance(signal, Arrive):
        items = [*items, signal.instance]
        flags["empty"] = False
        return [(QueuePhase.ARRIVE, flags_now())], items
    if isinstance(signal, DownstreamBusy):
        flags["busy"] = True
        return [(QueuePhase.BUSY, flags_now())], items
    flags["busy"] = False
    phases = [(QueuePhase.FREE, flags_now())]
    if items:
        head, items = items[0], items[1:]
        flags["busy"] = True
        phases.append((QueuePhase.DEQUEUE, {**flags_now(), f"{name}.dequeued": head}))
        if not items:
            flags["empty"] = True
            phases.append((QueuePhase.DRAIN, flags_now()))
    return phases, items


def queue_trace(specs: Iterable[QueueSpec], stimuli: Iterable[QueueStimulus]) -> Trace:
    """Records of a scenario driven only by queue signals.

    Signals are taken in declaration order among those due; with none due
    the clock moves to the first remaining signal.
    """
    by_name = {spec.name: spec for spec in specs}
    contents: dict[str, list[str]] = {name: [] for name in by_name}
    flags = {name: {"empty": True, "busy": False} for name in by_name}
    remaining = list(stimuli)
    records: list[TraceRecord] = []
    clock = taken = 0
    while remaining:
        due = [s for s in remaining if s.at <= clock]
        if not due:
            clock = remaining[0].at
            continue
        stimulus = due[0]
        remaining.remove(stimulus)
        phases, contents[stimulus.queue] = _queue_phases(stimulus.queue, contents[stimulus.queue], flags[stimulus.queue], stimulus.signal)
        for phase, snapshot in phases:
            records.extend(TraceRecord(clock, eid, RecordKind.FIRE, snapshot) for eid in by_name[stimulus.queue].events_for(phase))
        clock += 1
        taken += 1
    return Trace(records=records, halted=HaltReason.QUIESCENT, steps=taken)
