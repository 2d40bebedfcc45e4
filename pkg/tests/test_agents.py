"""Agent loop: playback, dependency signaling, isolation, bounded rounds."""

import json

import pytest

from geosquad.agents import (
    AgentSpec,
    build_agent_prompt,
    build_agent_spec,
    context_digest,
    run_subtask,
)
from geosquad.backend import (
    BackendConfig,
    ChatMessage,
    ScriptReply,
    ScriptRule,
    ScriptedBackend,
    ScriptedBehavior,
)
from geosquad.core import TokenUsage
from geosquad.errors import ToolIsolationError
from geosquad.sandbox import REGIONS, Sandbox, SandboxSession
from geosquad.toolkit import build_registry


@pytest.fixture(scope="module")
def sandbox():
    return Sandbox.generate(0)


@pytest.fixture(scope="module")
def registry():
    return build_registry()


def _agent(registry, name="Database", rounds=8):
    return build_agent_spec(name, registry, max_tool_rounds=rounds)


def _backend(rules, default="done"):
    return ScriptedBackend(
        ScriptedBehavior(rules=tuple(rules), default_reply=ScriptReply(text=default))
    )


_LOAD_CALL = (
    "load_product",
    {"product": "ndvi", "region": "brisbane", "date_start": "2024-01", "date_end": "2024-12"},
)


def test_run_subtask_load_then_done(sandbox, registry):
    backend = _backend(
        [
            ScriptRule(
                "Load ndvi for brisbane",
                (ScriptReply(tool_calls=(_LOAD_CALL,)), ScriptReply(text="loaded")),
            )
        ]
    )
    session = SandboxSession(sandbox)
    result = run_subtask(
        _agent(registry), "Load ndvi for brisbane from 2024-01 to 2024-12", "",
        backend, BackendConfig(), registry, session, ts_enabled=False,
    )
    assert result.status == "done"
    assert result.summary == "loaded"
    assert len(result.tool_calls) == 1
    assert result.tool_calls[0].result_status == "ok"
    assert len(result.tool_calls[0].accessed) == len(REGIONS["brisbane"]) * 12
    assert len(result.token_usage) == 2


def test_run_subtask_missing_product_flags_dependency(sandbox, registry):
    backend = _backend(
        [
            ScriptRule(
                "Recommend crop rotation",
                (
                    ScriptReply(
                        tool_calls=(
                            (
                                "low_ndvi_clusters",
                                {"handle": "latest", "threshold": 0.3, "min_cluster_size": 2},
                            ),
                        )
                    ),
                    ScriptReply(text="never reached"),
                ),
            )
        ]
    )
    session = SandboxSession(sandbox)
    result = run_subtask(
        _agent(registry, "Agriculture"), "Recommend crop rotation areas", "",
        backend, BackendConfig(), registry, session, ts_enabled=False,
    )
    assert result.status == "needs_dependency"
    assert result.dependency_hint.agent == "Database"
    assert result.dependency_hint.product == "ndvi"
    assert result.tool_calls[0].result_status == "error"
    assert "MissingProduct" in result.tool_calls[0].result_payload


def test_run_subtask_default_branch_no_calls(sandbox, registry):
    backend = _backend([])
    result = run_subtask(
        _agent(registry), "completely unmatched request", "",
        backend, BackendConfig(), registry, SandboxSession(sandbox), ts_enabled=False,
    )
    assert result.status == "done"
    assert result.summary == "done"
    assert result.tool_calls == ()


def test_tool_isolation_violation_raises(sandbox, registry):
    backend = _backend(
        [
            ScriptRule(
                "misbehave",
                (ScriptReply(tool_calls=(("map_snapshot", {}),)),),
            )
        ]
    )
    with pytest.raises(ToolIsolationError):
        run_subtask(
            _agent(registry, "Database"), "misbehave", "",
            backend, BackendConfig(), registry, SandboxSession(sandbox), ts_enabled=False,
        )


def test_bounded_rounds(sandbox, registry):
    backend = _backend(
        [
            ScriptRule(
                "loop forever",
                tuple(
                    ScriptReply(tool_calls=(("list_products", {}),)) for _ in range(50)
                ),
            )
        ]
    )
    result = run_subtask(
        _agent(registry, "Database", rounds=3), "loop forever", "",
        backend, BackendConfig(), registry, SandboxSession(sandbox), ts_enabled=False,
    )
    assert result.status == "failed"
    assert len(result.tool_calls) == 3
    assert "rounds exhausted" in result.summary


class _MalformedBackend:
    """Emits a syntactically broken tool call, then repeats or finishes."""

    def __init__(self, repeats):
        self.replies = repeats

    def complete(self, messages, tools, config):
        turn = sum(1 for m in messages if m.role == "assistant")
        reply = self.replies[min(turn, len(self.replies) - 1)]
        if reply == "bad":
            message = ChatMessage(
                role="assistant", tool_calls=(("c0", "list_products", "{not json"),)
            )
        else:
            message = ChatMessage(role="assistant", content=reply)
        return message, TokenUsage(1, 1, 2)


def test_malformed_args_one_retry_then_proceed(sandbox, registry):
    backend = _MalformedBackend(["bad", "recovered"])
    result = run_subtask(
        _agent(registry, "Database"), "anything", "",
        backend, BackendConfig(), registry, SandboxSession(sandbox), ts_enabled=False,
    )
    assert result.status == "done"
    assert result.summary == "recovered"
    assert result.tool_calls[0].result_status == "error"
    assert "MalformedArguments" in result.tool_calls[0].result_payload


def test_malformed_args_twice_fails(sandbox, registry):
    backend = _MalformedBackend(["bad", "bad", "never"])
    result = run_subtask(
        _agent(registry, "Database"), "anything", "",
        backend, BackendConfig(), registry, SandboxSession(sandbox), ts_enabled=False,
    )
    assert result.status == "failed"
    assert "malformed" in result.summary


def test_replay_determinism(sandbox, registry):
    backend = _backend(
        [
            ScriptRule(
                "Load ndvi for brisbane",
                (ScriptReply(tool_calls=(_LOAD_CALL,)), ScriptReply(text="loaded")),
            )
        ]
    )

    def run():
        session = SandboxSession(sandbox)
        result = run_subtask(
            _agent(registry), "Load ndvi for brisbane from 2024-01 to 2024-12", "",
            backend, BackendConfig(), registry, session, ts_enabled=False,
        )
        return [c.to_dict() for c in result.tool_calls], [u.to_dict() for u in result.token_usage]

    assert run() == run()


# --- prompt assembly -----------------------------------------------------------


def test_build_agent_prompt_two_messages(registry):
    agent = _agent(registry, "Agriculture")
    messages = build_agent_prompt(agent, "subtask text", "", "")
    assert [m.role for m in messages] == ["system", "user"]
    assert messages[1].content == "subtask text"


def test_build_agent_prompt_with_guidance_and_context(registry):
    agent = _agent(registry, "Agriculture")
    messages = build_agent_prompt(
        agent, "subtask text", 'Similar prompt: "crop areas"', "prior: Database=done"
    )
    assert "Similar prompt:" in messages[0].content
    assert "Context: prior" in messages[1].content


def test_build_agent_prompt_deterministic(registry):
    agent = _agent(registry, "Climate")
    a = build_agent_prompt(agent, "x", "g", "c")
    b = build_agent_prompt(agent, "x", "g", "c")
    assert a == b


def test_context_digest_bounded(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-01")
    digest = context_digest(["Database=done"] * 300, session)
    assert len(digest.split()) <= 200
    short = context_digest(["Database=done"], session)
    assert "h1=ndvi/brisbane" in short
