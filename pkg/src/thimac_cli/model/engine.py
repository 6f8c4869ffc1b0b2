"""Deterministic executor for behavior graphs.

One engine step does exactly one of the following, in priority order:

1. apply the earliest due queue stimulus;
2. fire the earliest due event stimulus whose event is receptive;
3. fire the first enabled event in declaration order.

When none applies but a later stimulus could, the logical clock jumps to it.
Otherwise the state is quiescent and is left untouched.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .behavior import BehaviorGraph, EdgeKind, enabled_events, receptive
from .errors import EvaluationError, MissingBindingError, Rule, SourceSpan, UnknownEventError, UnknownQueueError
from .events import Event, created_entities
from .expressions import Value, apply_effects, effect_reads, format_value, variables
from .queue import Arrive, QueueComponent, QueuePhase, QueueSignal, QueueSpec

logger = logging.getLogger(__name__)


class RecordKind(str, Enum):
    FIRE = "Fire"
    REVERT = "Revert"
    STIMULUS = "Stimulus"


class StepOutcome(str, Enum):
    FIRED = "fired"
    TRANSITION = "transition"
    QUIESCENT = "quiescent"


class HaltReason(str, Enum):
    QUIESCENT = "quiescent"
    BUDGET = "budget"


@dataclass(frozen=True)
class TraceRecord:
    step: int
    event: str
    kind: RecordKind
    env: Mapping[str, Value] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "event": self.event,
            "kind": self.kind.value,
            "env": {name: self.env[name] for name in sorted(self.env)},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> TraceRecord:
        return cls(step=data["step"], event=data["event"], kind=RecordKind(data["kind"]), env=dict(data.get("env", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    halted: HaltReason | None = None
    steps: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):  # noqa: ANN204
        return iter(self.records)

    def fired(self) -> list[str]:
        return [r.event for r in self.records if r.kind is RecordKind.FIRE]

    def reverted(self) -> list[str]:
        return [r.event for r in self.records if r.kind is RecordKind.REVERT]

    def to_jsonl(self) -> str:
        """One JSON object per record, newline-terminated. Empty traces serialize to ''."""
        return "".join(f"{r.to_json()}\n" for r in self.records)

    @classmethod
    def from_jsonl(cls, text: str) -> Trace:
        records = [TraceRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
        return cls(records=records, steps=len({r.step for r in records}))


@dataclass(frozen=True)
class EventStimulus:
    """External injection of an event, due from logical step ``at`` on."""

    event: str
    at: int = 0
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class QueueStimulus:
    queue: str
    signal: QueueSignal
    at: int = 0
    span: SourceSpan | None = field(default=None, compare=False)


Stimulus = Union[EventStimulus, QueueStimulus]


@dataclass
class Instance:
    label: str
    live: bool
    created_by: str


@dataclass(frozen=True)
class StepResult:
    outcome: StepOutcome
    event: str | None = None
    reverted: tuple[str, ...] = ()
    dequeued: str | None = None
    records: tuple[TraceRecord, ...] = ()


@dataclass
class SimState:
    behavior: BehaviorGraph
    env: dict[str, Value]
    actualized: dict[str, int] = field(default_factory=dict)
    fire_counts: dict[str, int] = field(default_factory=dict)
    instances: dict[str, Instance] = field(default_factory=dict)
    queues: dict[str, QueueComponent] = field(default_factory=dict)
    queue_specs: dict[str, QueueSpec] = field(default_factory=dict)
    pending: list[Stimulus] = field(default_factory=list)
    step: int = 0
    trace: list[TraceRecord] = field(default_factory=list)

    def enabled(self) -> list[str]:
        return enabled_events(self.behavior, self)

    def event(self, event_id: str) -> Event:
        """The event with its current status and time."""
        event = self.behavior.event(event_id)
        if event_id in self.actualized:
            return event.actualized_at(self.actualized[event_id])
        return event

    def live_instances(self) -> list[str]:
        return sorted(label for label, inst in self.instances.items() if inst.live)

    def erased_instances(self) -> list[str]:
        return sorted(label for label, inst in self.instances.items() if not inst.live)


def required_variables(bg: BehaviorGraph) -> frozenset[str]:
    """Variables read by guards or effects of events reachable from initial or external events."""
    frontier = [e.id for e in bg.events if e.id in bg.initial or e.external]
    reachable = set(frontier)
    while frontier:
        for edge in bg.outgoing.get(frontier.pop(), ()):
            if edge.target not in reachable:
                reachable.add(edge.target)
                frontier.append(edge.target)
    names: set[str] = set()
    for eid in reachable:
        event = bg.event(eid)
        names |= variables(event.guard) | effect_reads(event.effects)
    for edge in bg.edges:
        if edge.kind is EdgeKind.SEQUENCE and edge.source in reachable:
            names |= variables(edge.guard)
    return frozenset(names)


def init_state(
    bg: BehaviorGraph,
    bindings: Mapping[str, Value],
    stimuli: Iterable[Stimulus] = (),
    *,
    queues: Iterable[QueueSpec] = (),
    strict: bool = True,
) -> SimState:
    """Fresh state at step 0: nothing actualized, every queue empty and idle.

    Declared defaults fill unbound variables. With ``strict`` every variable
    read on a reachable guard or effect must end up bound.
    """
    model = bg.model
    env: dict[str, Value] = {v.name: v.default for v in model.variables if v.default is not None}
    for name, value in bindings.items():
        variable = model.variable_index.get(name)
        if variable is None:
            raise EvaluationError(Rule.UNDECLARED_VARIABLE, f"binding for undeclared variable '{name}'", subject=name)
        if not variable.admits(value):
            raise EvaluationError(
                Rule.BINDING_TYPE_ERROR,
                f"value {format_value(value)} does not fit {variable.type.value} variable '{name}'",
                subject=name,
            )
        env[name] = value

    if strict:
        missing = required_variables(bg) - env.keys()
        if missing:
            raise MissingBindingError(missing)

    specs = {spec.name: spec for spec in queues}
    pending: list[Stimulus] = []
    for stimulus in stimuli:
        if isinstance(stimulus, EventStimulus) and stimulus.event not in bg.event_index:
            raise UnknownEventError(stimulus.event, "stimuli")
        if isinstance(stimulus, QueueStimulus) and stimulus.queue not in specs:
            raise UnknownQueueError(stimulus.queue)
        pending.append(stimulus)
    pending.sort(key=lambda s: s.at)

    return SimState(
        behavior=bg,
        env=env,
        queues={name: QueueComponent(name) for name in specs},
        queue_specs=specs,
        pending=pending,
    )


def _plan(state: SimState) -> tuple[str, object] | None:
    """Next action without changing anything: ('queue'|'stimulus', stimulus), ('fire', id) or ('jump', step)."""
    bg = state.behavior
    for stimulus in state.pending:
        if stimulus.at <= state.step and isinstance(stimulus, QueueStimulus):
            return "queue", stimulus
    for stimulus in state.pending:
        if stimulus.at <= state.step and isinstance(stimulus, EventStimulus) and receptive(bg, state, bg.event(stimulus.event)):
            return "stimulus", stimulus
    enabled = enabled_events(bg, state)
    if enabled:
        return "fire", enabled[0]
    for stimulus in state.pending:
        if stimulus.at <= state.step:
            continue
        if isinstance(stimulus, QueueStimulus) or receptive(bg, state, bg.event(stimulus.event)):
            return "jump", stimulus.at
    return None


def step(state: SimState) -> StepResult:
    plan = _plan(state)
    if plan is None:
        return StepResult(StepOutcome.QUIESCENT)
    action, target = plan
    if action == "jump":
        logger.debug("Clock jumps from %d to %d", state.step, target)
        state.step = target  # type: ignore[assignment]
        plan = _plan(state)
        assert plan is not None and plan[0] != "jump"
        action, target = plan

    if action == "queue":
        state.pending.remove(target)  # type: ignore[arg-type]
        return queue_transition(state, target.queue, target.signal)  # type: ignore[union-attr]
    if action == "stimulus":
        state.pending.remove(target)  # type: ignore[arg-type]
        return _fire(state, state.behavior.event(target.event), stimulated=True)  # type: ignore[union-attr]
    return _fire(state, state.behavior.event(target), stimulated=False)  # type: ignore[arg-type]


def _fire(state: SimState, event: Event, *, stimulated: bool) -> StepResult:
    bg = state.behavior
    now = state.step
    env = dict(state.env)
    written = apply_effects(event.effects, env, bg.model.variable_types)
    state.env = env

    records: list[TraceRecord] = []
    if stimulated:
        records.append(TraceRecord(now, event.id, RecordKind.STIMULUS))
    state.actualized[event.id] = now
    state.fire_counts[event.id] = state.fire_counts.get(event.id, 0) + 1
    for label in created_entities(bg.model, event):
        state.instances[label] = Instance(label, live=True, created_by=event.id)
    records.append(TraceRecord(now, event.id, RecordKind.FIRE, written))

    reverted: list[str] = []
    for target in bg.reverts.get(event.id, ()):
        if target not in state.actualized:
            continue
        del state.actualized[target]
        for instance in state.instances.values():
            if instance.created_by == target:
                instance.live = False
        records.append(TraceRecord(now, target, RecordKind.REVERT))
        reverted.append(target)

    logger.debug("step %d: fired %s%s", now, event.id, f", reverted {', '.join(reverted)}" if reverted else "")
    state.trace.extend(records)
    state.step += 1
    return StepResult(StepOutcome.FIRED, event.id, tuple(reverted), None, tuple(records))


def queue_transition(state: SimState, queue: str, signal: QueueSignal) -> StepResult:
    """Apply one queue signal as a whole engine step.

    Arriving items are registered as live instances created by the queue's
    first arrival event.
    """
    component = state.queues.get(queue)
    if component is None:
        raise UnknownQueueError(queue)
    spec = state.queue_specs[queue]
    passed, dequeued = component.apply(signal)
    records = [
        TraceRecord(state.step, event_id, RecordKind.FIRE, snapshot)
        for phase, snapshot in passed
        for event_id in spec.events_for(phase)
    ]
    if isinstance(signal, Arrive):
        arrival = spec.events_for(QueuePhase.ARRIVE)
        state.instances[signal.instance] = Instance(signal.instance, live=True, created_by=arrival[0] if arrival else queue)
    logger.debug("step %d: queue %s %s -> %s", state.step, queue, type(signal).__name__, [phase.value for phase, _ in passed])
    state.trace.extend(records)
    state.step += 1
    return StepResult(StepOutcome.TRANSITION, records[0].event if records else None, (), dequeued, tuple(records))


def run(state: SimState, max_steps: int) -> Trace:
    """Step until quiescence or until ``max_steps`` steps were taken. Returns the new records."""
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    start = len(state.trace)
    taken = 0
    halted: HaltReason | None = None
    while taken < max_steps:
        if step(state).outcome is StepOutcome.QUIESCENT:
            halted = HaltReason.QUIESCENT
            break
        taken += 1
    if halted is None:
        try:
            halted = HaltReason.QUIESCENT if _plan(state) is None else HaltReason.BUDGET
        except EvaluationError:
            halted = HaltReason.BUDGET
    logger.debug("run halted (%s) after %d step(s)", halted.value, taken)
    return Trace(records=state.trace[start:], halted=halted, steps=taken)
