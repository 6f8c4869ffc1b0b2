"""Unit tests for the simulation engine (``thimac_cli.model.engine``)."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thimac_cli.catalog import registry
from thimac_cli.dsl.builder import Bundle
from thimac_cli.model.engine import (
    EventStimulus,
    HaltReason,
    QueueStimulus,
    RecordKind,
    StepOutcome,
    Trace,
    TraceRecord,
    init_state,
    queue_transition,
    required_variables,
    run,
    step,
)
from thimac_cli.model.errors import EvaluationError, MissingBindingError, Rule, UnknownEventError, UnknownQueueError
from thimac_cli.model.events import EventStatus
from thimac_cli.model.queue import Arrive, DownstreamFree

_GOLDENS = [(name, golden) for name in ("socrates", "inventory", "queue") for golden in registry.scenarios(name)]

# An order the stock covers: 1 <= Quantity <= Inventory <= 1000.
_covered_orders = st.integers(1, 1000).flatmap(lambda level: st.tuples(st.just(level), st.integers(1, level)))


def _start(bundle: Bundle, scenario: str, **kwargs):  # noqa: ANN003, ANN202
    return bundle.start(bundle.scenario(scenario), **kwargs)


# ===========================================================================
# Golden traces
# ===========================================================================


class TestGoldenTraces:
    @pytest.mark.parametrize(("name", "golden"), _GOLDENS, ids=[f"{n}-{g.scenario.name}" for n, g in _GOLDENS])
    def test_matches_golden(self, name: str, golden) -> None:  # noqa: ANN001
        state = registry.load_bundle(name).start(golden.scenario)
        trace = run(state, 1000)
        assert trace.to_jsonl() == golden.trace.to_jsonl()
        assert trace.halted is golden.trace.halted
        assert trace.steps == golden.trace.steps

    def test_every_scenario_has_a_golden(self) -> None:
        for name in registry.CATALOG:
            goldens = registry.expected(name)["scenarios"]
            assert sorted(goldens) == sorted(s.name for s in registry.load(name).scenarios)

    def test_fulfil_updates_inventory(self, inventory: Bundle) -> None:
        state = _start(inventory, "fulfil")
        run(state, 1000)
        assert state.env["Inventory"] == 2
        assert "E9" in state.actualized

    def test_fulfil_above_reorder_point(self, inventory: Bundle) -> None:
        state = inventory.start(inventory.scenario("fulfil"))
        state.env["Inventory"] = 10
        trace = run(state, 1000)
        assert trace.fired()[-1] == "E8"
        assert state.env["Inventory"] == 7

    @settings(max_examples=200)
    @given(_covered_orders)
    def test_fulfil_subtracts_quantity(self, order: tuple[int, int]) -> None:
        level, quantity = order
        state = init_state(registry.load_bundle("inventory").behavior, {"Inventory": level, "Quantity": quantity})
        trace = run(state, 1000)
        assert state.env["Inventory"] == level - quantity
        assert trace.fired()[:8] == ["E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8"]
        assert ("E9" in state.actualized) is (level - quantity <= 2)


# ===========================================================================
# run / step
# ===========================================================================


class TestRun:
    def test_zero_budget_leaves_state_alone(self, inventory: Bundle) -> None:
        state = _start(inventory, "decline")
        trace = run(state, 0)
        assert trace.records == []
        assert trace.halted is HaltReason.BUDGET
        assert trace.steps == 0
        assert state.step == 0
        assert state.actualized == {}

    def test_negative_budget(self, inventory: Bundle) -> None:
        with pytest.raises(ValueError, match="max_steps"):
            run(_start(inventory, "decline"), -1)

    def test_budget_halts_mid_run(self, inventory: Bundle) -> None:
        trace = run(_start(inventory, "decline"), 2)
        assert trace.fired() == ["E1", "E2"]
        assert trace.halted is HaltReason.BUDGET

    def test_budget_equal_to_length_is_quiescent(self, inventory: Bundle) -> None:
        trace = run(_start(inventory, "decline"), 5)
        assert trace.halted is HaltReason.QUIESCENT

    def test_resumes_where_it_stopped(self, inventory: Bundle) -> None:
        state = _start(inventory, "decline")
        first = run(state, 2)
        second = run(state, 1000)
        assert first.fired() + second.fired() == ["E1", "E2", "E3", "E4", "E11"]
        assert second.records[0].step == 2

    def test_quiescent_state_is_untouched(self, inventory: Bundle) -> None:
        state = _start(inventory, "decline")
        run(state, 1000)
        before = (dict(state.actualized), dict(state.env), state.step)
        assert step(state).outcome is StepOutcome.QUIESCENT
        assert run(state, 1000).records == []
        assert (dict(state.actualized), dict(state.env), state.step) == before

    @pytest.mark.parametrize("scenario", ["decline", "fulfil", "reject-partial", "accept-partial"])
    def test_deterministic(self, inventory: Bundle, scenario: str) -> None:
        first = run(_start(inventory, scenario), 1000).to_jsonl()
        second = run(_start(inventory, scenario), 1000).to_jsonl()
        assert first == second

    def test_step_result(self, socrates: Bundle) -> None:
        state = socrates.start()
        result = step(state)
        assert result.outcome is StepOutcome.FIRED
        assert result.event == "E1"
        assert result.records == (TraceRecord(0, "E1", RecordKind.FIRE),)

    def test_event_status_follows_actualization(self, socrates: Bundle) -> None:
        state = socrates.start()
        assert state.event("E1").status is EventStatus.SUBSISTING
        step(state)
        assert state.event("E1").status is EventStatus.ACTUALIZED
        assert state.event("E1").time == 0

    def test_unbound_guard_variable_in_lenient_mode(self, inventory: Bundle) -> None:
        state = init_state(inventory.behavior, {"Inventory": 5}, strict=False)
        with pytest.raises(EvaluationError) as exc_info:
            run(state, 1000)
        assert exc_info.value.rule is Rule.UNBOUND_VARIABLE
        assert state.step == 4


class TestBranching:
    def test_exactly_one_comparison_outcome(self, inventory: Bundle) -> None:
        outcomes = {"E5", "E11", "E12"}
        for level in range(51):
            for quantity in range(1, 51):
                state = init_state(inventory.behavior, {"Inventory": level, "Quantity": quantity})
                fired = set(run(state, 1000).fired())
                assert len(fired & outcomes) == 1, (level, quantity)

    @pytest.mark.parametrize(
        ("level", "quantity", "outcome"),
        [(0, 1, "E11"), (0, 50, "E11"), (3, 3, "E5"), (3, 1, "E5"), (3, 4, "E12"), (1, 50, "E12")],
    )
    def test_comparison_outcome(self, inventory: Bundle, level: int, quantity: int, outcome: str) -> None:
        state = init_state(inventory.behavior, {"Inventory": level, "Quantity": quantity})
        assert outcome in run(state, 1000).fired()


# ===========================================================================
# Reverts
# ===========================================================================


class TestReverts:
    def test_revert_erases_created_instances(self, inventory: Bundle) -> None:
        state = _start(inventory, "reject-partial")
        run(state, 1000)
        assert "E1" not in state.actualized
        assert state.erased_instances() == ["order"]
        assert "order" not in state.live_instances()
        assert "notice" in state.live_instances()
        assert state.enabled() == []
        assert state.pending == []

    def test_reverted_event_does_not_refire_without_cause(self, inventory: Bundle) -> None:
        state = _start(inventory, "reject-partial")
        trace = run(state, 1000)
        assert trace.fired().count("E1") == 1
        assert state.fire_counts["E1"] == 1

    def test_revert_then_refire(self, inventory: Bundle) -> None:
        state = _start(inventory, "accept-partial")
        trace = run(state, 1000)
        assert trace.reverted() == ["E4"]
        assert state.fire_counts["E4"] == 2
        assert state.actualized["E4"] == 6
        assert state.env == {"Inventory": 0, "Quantity": 2, "ReorderPoint": 2, "ReorderQuantity": 10}

    def test_revert_of_subsisting_event_is_silent(self, inventory: Bundle) -> None:
        state = init_state(
            inventory.behavior,
            {"Inventory": 2, "Quantity": 5},
            [EventStimulus("E14", 0)],
        )
        run(state, 5)
        del state.actualized["E1"]
        trace = run(state, 1000)
        assert trace.reverted() == []
        assert trace.fired() == ["E14"]

    def test_stimulus_record_precedes_fire(self, inventory: Bundle) -> None:
        trace = run(_start(inventory, "reject-partial"), 1000)
        kinds = [(r.event, r.kind) for r in trace.records if r.step == 5]
        assert kinds == [("E14", RecordKind.STIMULUS), ("E14", RecordKind.FIRE), ("E1", RecordKind.REVERT)]


class TestCustomerResponses:
    """Accepting and declining a partial fulfilment exclude each other."""

    @staticmethod
    def _partial(inventory: Bundle, *stimuli: EventStimulus):  # noqa: ANN205
        return init_state(inventory.behavior, {"Inventory": 2, "Quantity": 5}, list(stimuli))

    def test_accept_shuts_out_decline(self, inventory: Bundle) -> None:
        state = self._partial(inventory, EventStimulus("E13", 0), EventStimulus("E14", 0))
        trace = run(state, 1000)
        golden = next(g for g in registry.scenarios("inventory") if g.scenario.name == "accept-partial")
        assert "E14" not in trace.fired()
        assert "E1" in state.actualized
        assert trace.to_jsonl() == golden.trace.to_jsonl()

    def test_late_decline_after_accept_is_ignored(self, inventory: Bundle) -> None:
        state = self._partial(inventory, EventStimulus("E13", 0), EventStimulus("E14", 6))
        trace = run(state, 1000)
        assert trace.fired().count("E13") == 1
        assert "E14" not in trace.fired()
        assert trace.reverted() == ["E4"]

    def test_decline_shuts_out_accept(self, inventory: Bundle) -> None:
        state = self._partial(inventory, EventStimulus("E14", 0), EventStimulus("E13", 0))
        trace = run(state, 1000)
        assert trace.fired() == ["E1", "E2", "E3", "E4", "E12", "E14"]
        assert trace.reverted() == ["E1"]
        assert "E5" not in state.actualized
        assert state.enabled() == []


# ===========================================================================
# Stimuli and bindings
# ===========================================================================


class TestStimuli:
    def test_non_receptive_stimulus_waits(self, inventory: Bundle) -> None:
        state = init_state(inventory.behavior, {"Inventory": 0, "Quantity": 2}, [EventStimulus("E14", 0)])
        trace = run(state, 1000)
        assert trace.fired() == ["E1", "E2", "E3", "E4", "E11"]
        assert trace.halted is HaltReason.QUIESCENT
        assert len(state.pending) == 1

    def test_clock_jumps_to_next_stimulus(self, inventory: Bundle) -> None:
        stimuli = [EventStimulus("E10", 50)]
        state = init_state(inventory.behavior, {"Inventory": 5, "Quantity": 3}, stimuli)
        trace = run(state, 1000)
        assert trace.records[-2:] == [
            TraceRecord(50, "E10", RecordKind.STIMULUS),
            TraceRecord(50, "E10", RecordKind.FIRE, {"Inventory": 12}),
        ]
        assert trace.steps == 10
        assert state.step == 51

    def test_stimulus_beats_enabled_event(self, socrates: Bundle) -> None:
        state = init_state(socrates.behavior, {}, [EventStimulus("E1", 0)])
        trace = run(state, 1000)
        assert trace.records[0] == TraceRecord(0, "E1", RecordKind.STIMULUS)

    def test_unknown_stimulus_event(self, inventory: Bundle) -> None:
        with pytest.raises(UnknownEventError):
            init_state(inventory.behavior, {"Inventory": 1, "Quantity": 1}, [EventStimulus("E99", 0)])

    def test_unknown_queue(self, inventory: Bundle) -> None:
        with pytest.raises(UnknownQueueError):
            init_state(inventory.behavior, {"Inventory": 1, "Quantity": 1}, [QueueStimulus("Q", DownstreamFree(), 0)])


class TestBindings:
    def test_required_variables(self, inventory: Bundle) -> None:
        assert required_variables(inventory.behavior) == {"Inventory", "Quantity", "ReorderPoint", "ReorderQuantity"}

    def test_missing_binding(self, inventory: Bundle) -> None:
        with pytest.raises(MissingBindingError) as exc_info:
            inventory.start()
        assert exc_info.value.names == ("Inventory", "Quantity")

    def test_lenient_start(self, inventory: Bundle) -> None:
        assert inventory.start(strict=False).enabled() == ["E1"]

    def test_defaults_apply(self, inventory: Bundle) -> None:
        state = init_state(inventory.behavior, {"Inventory": 1, "Quantity": 1})
        assert state.env["ReorderPoint"] == 2

    @pytest.mark.parametrize(("name", "value"), [("Inventory", True), ("Inventory", -1), ("Quantity", 0), ("Quantity", "3")])
    def test_binding_must_fit_variable(self, inventory: Bundle, name: str, value: object) -> None:
        bindings = {"Inventory": 1, "Quantity": 1, name: value}
        with pytest.raises(EvaluationError) as exc_info:
            init_state(inventory.behavior, bindings)
        assert exc_info.value.rule is Rule.BINDING_TYPE_ERROR

    def test_undeclared_binding(self, inventory: Bundle) -> None:
        with pytest.raises(EvaluationError) as exc_info:
            init_state(inventory.behavior, {"Inventory": 1, "Quantity": 1, "Price": 3})
        assert exc_info.value.rule is Rule.UNDECLARED_VARIABLE


# ===========================================================================
# Queue transitions inside the engine
# ===========================================================================


class TestQueueTransitions:
    def test_arrive_then_free(self) -> None:
        bundle = registry.load_bundle("queue")
        state = bundle.start()
        queue_transition(state, "Q", Arrive("o1"))
        result = queue_transition(state, "Q", DownstreamFree())
        assert result.outcome is StepOutcome.TRANSITION
        assert result.dequeued == "o1"
        assert [r.event for r in result.records] == ["E4", "E5", "E6", "E7"]
        assert state.queues["Q"].empty
        assert [r.env["Q.busy"] for r in result.records] == [False, True, True, True]
        assert result.records[1].env["Q.dequeued"] == "o1"

    def test_arrivals_are_live_instances(self) -> None:
        state = registry.load_bundle("queue").start()
        queue_transition(state, "Q", Arrive("o1"))
        queue_transition(state, "Q", Arrive("o2"))
        queue_transition(state, "Q", DownstreamFree())
        assert state.live_instances() == ["o1", "o2"]
        assert state.instances["o1"].created_by == "E1"

    def test_queue_events_are_not_actualized(self) -> None:
        state = registry.load_bundle("queue").start()
        queue_transition(state, "Q", Arrive("o1"))
        assert state.actualized == {}

    def test_unknown_queue(self) -> None:
        with pytest.raises(UnknownQueueError):
            queue_transition(registry.load_bundle("queue").start(), "R", DownstreamFree())


# ===========================================================================
# Trace serialization
# ===========================================================================


class TestTrace:
    def test_jsonl_layout(self) -> None:
        trace = Trace([TraceRecord(3, "E8", RecordKind.FIRE, {"Quantity": 1, "Inventory": 2})])
        assert trace.to_jsonl() == '{"step": 3, "event": "E8", "kind": "Fire", "env": {"Inventory": 2, "Quantity": 1}}\n'

    def test_empty_trace(self) -> None:
        assert Trace().to_jsonl() == ""

    def test_from_jsonl(self) -> None:
        text = '{"step": 0, "event": "E1", "kind": "Stimulus", "env": {}}\n\n{"step": 0, "event": "E1", "kind": "Fire", "env": {}}\n'
        trace = Trace.from_jsonl(text)
        assert [r.kind for r in trace.records] == [RecordKind.STIMULUS, RecordKind.FIRE]
        assert trace.steps == 1
