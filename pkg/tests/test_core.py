"""Core type invariants, serialization round-trips, dataset validation."""

import random

import pytest
from hypothesis import given, strategies as st

from geosquad.core import (
    CoreValidationError,
    DataPointKey,
    ExecutionTrace,
    GoldSolution,
    GoldStep,
    RunUsage,
    Schedule,
    SubTask,
    TaskPrompt,
    TokenUsage,
    ToolCall,
    args_match,
    decode_keyset,
    encode_keyset,
    normalize_args,
    validate_dataset,
)

KEYS = st.builds(
    DataPointKey,
    product=st.sampled_from(["ndvi", "lst", "canopy", "detection"]),
    cell=st.tuples(st.integers(0, 63), st.integers(0, 63)),
    date=st.sampled_from(["2024-01", "2024-07", "2020", "2024"]),
)


@given(KEYS)
def test_datapointkey_compact_roundtrip(key):
    assert DataPointKey.from_compact(key.compact()) == key


@given(st.lists(KEYS, max_size=30))
def test_keyset_roundtrip_and_stable_order(keys):
    encoded = encode_keyset(keys)
    assert decode_keyset(encoded) == set(keys)
    shuffled = list(keys)
    random.Random(13).shuffle(shuffled)
    assert encode_keyset(shuffled) == encoded


def test_datapointkey_order_total():
    a = DataPointKey("ndvi", (0, 1), "2024-01")
    b = DataPointKey("ndvi", (0, 2), "2024-01")
    c = DataPointKey("lst", (0, 0), "2024-01")
    assert a < b
    assert c < a  # lst < ndvi lexicographically
    assert sorted([b, a, c]) == sorted([c, b, a])


@given(
    st.builds(
        TaskPrompt,
        id=st.text(min_size=1, max_size=8, alphabet="abc123_"),
        domain=st.sampled_from(["agriculture", "map", "vision"]),
        text=st.text(min_size=1, max_size=40),
        region=st.sampled_from(["brisbane", "all"]),
        date_range=st.none() | st.tuples(st.just("2024-01"), st.just("2024-03")),
    )
)
def test_taskprompt_roundtrip(task):
    assert TaskPrompt.from_dict(task.to_dict()) == task


def test_taskprompt_invariants():
    with pytest.raises(CoreValidationError):
        TaskPrompt(id="", domain="map", text="x", region="all")
    with pytest.raises(CoreValidationError):
        TaskPrompt(id="t", domain="map", text="", region="all")
    with pytest.raises(CoreValidationError):
        TaskPrompt(id="t", domain="oceanography", text="x", region="all")


def _gold(task_id="t1", tool="load_product"):
    return GoldSolution(
        task_id=task_id,
        steps=(
            GoldStep("Database", tool, {"product": "ndvi", "region": "brisbane",
                                        "date_start": "2024-01", "date_end": "2024-02"}),
        ),
        gold_datapoints={DataPointKey("ndvi", (40, 48), "2024-01")},
    )


def test_gold_roundtrip():
    gold = _gold()
    assert GoldSolution.from_dict(gold.to_dict()) == gold


def test_gold_requires_steps():
    with pytest.raises(CoreValidationError):
        GoldSolution(task_id="t", steps=(), gold_datapoints=frozenset())


def test_toolcall_roundtrip_and_error_payload():
    call = ToolCall(
        agent="Database",
        tool="load_product",
        args={"product": "ndvi"},
        result_status="ok",
        result_payload="{}",
        accessed={DataPointKey("ndvi", (1, 2), "2024-01")},
    )
    assert ToolCall.from_dict(call.to_dict()) == call
    with pytest.raises(CoreValidationError):
        ToolCall(
            agent="Database", tool="x", args={}, result_status="error", result_payload=""
        )


def test_schedule_revision_sequence_enforced():
    sched = Schedule((SubTask("Database", "load"),), revision=0)
    usage = RunUsage((TokenUsage(3, 2, 5),))
    trace = ExecutionTrace(
        task_id="t",
        strategy="hybrid",
        executed_steps=(),
        schedules=(sched, Schedule(sched.subtasks, revision=1)),
        token_usage=usage,
        final_answer="ok",
        terminal="completed",
    )
    assert ExecutionTrace.from_dict(trace.to_dict()) == trace
    with pytest.raises(CoreValidationError):
        ExecutionTrace(
            task_id="t",
            strategy="hybrid",
            executed_steps=(),
            schedules=(sched, Schedule(sched.subtasks, revision=2)),
            token_usage=usage,
            final_answer="ok",
            terminal="completed",
        )


def test_trace_schedules_required_except_single_agent():
    usage = RunUsage()
    with pytest.raises(CoreValidationError):
        ExecutionTrace(
            task_id="t", strategy="hybrid", executed_steps=(), schedules=(),
            token_usage=usage, final_answer="", terminal="completed",
        )
    trace = ExecutionTrace(
        task_id="t", strategy="single_agent", executed_steps=(), schedules=(),
        token_usage=usage, final_answer="", terminal="completed",
    )
    assert trace.schedules == ()


def test_token_usage_invariants():
    with pytest.raises(CoreValidationError):
        TokenUsage(2, 2, 5)
    with pytest.raises(CoreValidationError):
        TokenUsage(-1, 0, -1)
    run = RunUsage((TokenUsage(1, 2, 3), TokenUsage(4, 0, 4)))
    assert run.total_tokens == 7
    assert run.prompt_tokens == 5
    assert run.completion_tokens == 2


def test_normalize_and_match_args():
    a = {"region": "Brisbane", "threshold": 0.3}
    b = {"threshold": 0.3 + 1e-9, "region": "brisbane "}
    assert args_match(a, b)
    assert not args_match(a, {"region": "brisbane"})
    assert not args_match(a, {"region": "sydney", "threshold": 0.3})
    assert normalize_args({"b": 1, "a": "X"}) == (("a", "x"), ("b", 1.0))


# --- validate_dataset --------------------------------------------------------


class _FakeRegistry:
    def __init__(self, known):
        self.known = set(known)

    def has_tool(self, agent, name):
        return (agent, name) in self.known


_BOUNDS = {"ndvi": (64, 64, tuple(f"2024-{m:02d}" for m in range(1, 13)))}


def _two_task_fixture():
    tasks = [
        TaskPrompt(id="t1", domain="database", text="Load ndvi", region="brisbane"),
        TaskPrompt(id="t2", domain="database", text="Load ndvi again", region="brisbane"),
    ]
    golds = [_gold("t1"), _gold("t2")]
    registry = _FakeRegistry({("Database", "load_product")})
    return tasks, golds, registry


def test_validate_dataset_clean():
    tasks, golds, registry = _two_task_fixture()
    assert validate_dataset(tasks, golds, registry, _BOUNDS) == []


def test_validate_dataset_unknown_tool():
    tasks, golds, registry = _two_task_fixture()
    golds[0] = GoldSolution(
        task_id="t1",
        steps=(GoldStep("Database", "frob", {}),),
        gold_datapoints=frozenset(),
    )
    errors = validate_dataset(tasks, golds, registry, _BOUNDS)
    assert len(errors) == 1
    assert "t1" in errors[0] and "frob" in errors[0]


def test_validate_dataset_out_of_bounds():
    tasks, golds, registry = _two_task_fixture()
    golds[0] = GoldSolution(
        task_id="t1",
        steps=golds[0].steps,
        gold_datapoints={DataPointKey("ndvi", (64, 0), "2024-01")},
    )
    errors = validate_dataset(tasks, golds, registry, _BOUNDS)
    assert len(errors) == 1
    assert "out of bounds" in errors[0]


def test_validate_dataset_missing_gold():
    tasks, golds, registry = _two_task_fixture()
    errors = validate_dataset(tasks, golds[:1], registry, _BOUNDS)
    assert any("exactly one gold" in e for e in errors)
